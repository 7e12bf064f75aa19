"""Token-game execution: enabling, firing, synchronous cross-net invocation
through ISP places, and policy-driven runs.

States are values; every step function returns a new state.  An ISP place
holding a token immediately runs the invoked method to completion; the token
becomes consumable downstream only once that call has returned.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from itertools import product

from . import algebra, guards
from .errors import (ArityMismatch, DepthLimitExceeded, NotEnabled,
                     SubnetDeadlock, UnboundFreeVariable, UnknownMethod)
from .model import PlaceKind, Registry, Token, WebService, natural_key

GOAL, DEADLOCK, STEP_LIMIT = "Goal", "Deadlock", "StepLimit"


@dataclass(frozen=True)
class SimConfig:
    policy: str = "det"  # det | random
    seed: int = 0
    depth_limit: int = 16
    max_steps: int = 10000


@dataclass(frozen=True)
class FiringEvent:
    depth: int
    transition: str
    binding: tuple  # tuple[(name, value), ...]
    consumed: tuple  # tuple[(place, fields), ...]
    produced: tuple


@dataclass(frozen=True)
class SimState:
    ws: WebService
    method_name: str
    marking: tuple  # tuple[(pid, tuple[Token, ...]), ...]
    env: tuple  # tuple[(name, value), ...]
    trace: tuple = ()
    depth: int = 0
    registry: Registry = None
    config: SimConfig = SimConfig()

    def marking_map(self):
        return {pid: toks for pid, toks in self.marking}

    def env_map(self):
        return dict(self.env)


def _freeze_marking(marking: dict) -> tuple:
    out = []
    for pid in sorted(marking, key=natural_key):
        toks = tuple(sorted(marking[pid], key=lambda t: repr(t.fields)))
        if toks:
            out.append((pid, toks))
    return tuple(out)


def _freeze_env(env: dict) -> tuple:
    return tuple(sorted(env.items()))


def init_state(ws: WebService, method_name: str, args=(), registry=None,
               config: SimConfig = None, depth: int = 0) -> SimState:
    config = config or SimConfig()
    method = ws.net.gsp.method(method_name)
    if method is None:
        raise UnknownMethod(ws.name, method_name)
    if len(args) != len(method.params):
        raise ArityMismatch(
            f"{ws.name}.{method_name} takes {len(method.params)} argument(s), "
            f"got {len(args)}")
    fields = {pname: value for (pname, _), value in zip(method.params, args)}
    init_place = ws.net.internal.place_map()[method.init_place]
    token = Token.make(fields,
                       returned=init_place.kind is not PlaceKind.ISP)
    env = {a.name: a.initial for a in ws.net.gsp.attributes
           if a.initial is not None}
    state = SimState(ws=ws, method_name=method_name,
                     marking=_freeze_marking({method.init_place: [token]}),
                     env=_freeze_env(env), depth=depth, registry=registry,
                     config=config)
    return _settle(state)


# --- Enabling --------------------------------------------------------------

def _effective_domain(ws, name):
    attr = ws.net.gsp.attribute(name)
    if attr is None:
        return None
    if attr.domain is not None:
        return tuple(attr.domain)
    if attr.value_type == "bool":
        return (False, True)
    return None


def _match_pattern(pattern, token, binding, env):
    """Bind the pattern variables of one input arc against a token.  Returns
    the extended binding or None on conflict.  A variable resolves from the
    token's like-named field, then from the frame env, then positionally;
    anything still unresolved is handled by the domain fallback later."""
    fields = token.field_map()
    values = [v for _, v in token.fields]
    out = dict(binding)
    positional_ok = len(pattern) == len(token.fields)
    for i, expr in enumerate(pattern):
        name = expr.name  # patterns are all-variable by validation
        if name in fields:
            value = fields[name]
        elif positional_ok and name not in out and name not in env:
            value = values[i]
        else:
            continue  # resolved from the frame env or a domain later
        if name in out and out[name] != value:
            return None
        out[name] = value
    return out


def _needed_vars(struct, tid):
    needed = set()
    cond = struct.condition_map().get(tid)
    if cond is not None:
        needed |= guards.condition_vars(cond)
    needed |= guards.action_vars(struct.action_map().get(tid, ()))
    ins_map = struct.inscription_map()
    for q in struct.post(tid):
        for expr in ins_map.get((tid, q), ()):
            needed |= guards.expr_vars(expr)
    return needed


def _enabled_detail(state: SimState):
    """All (transition, binding, token-combo) triples currently fireable."""
    struct = state.ws.net.internal
    marking = state.marking_map()
    env = state.env_map()
    ins_map = struct.inscription_map()
    cond_map = struct.condition_map()
    results = []
    for tid in sorted(struct.transitions, key=natural_key):
        pre = struct.pre(tid)
        pools = []
        for pid in pre:
            toks = [t for t in marking.get(pid, ()) if t.returned]
            if not toks:
                pools = None
                break
            pools.append([(pid, t) for t in toks])
        if pools is None:
            continue
        for combo in product(*pools):
            binding = {}
            ok = True
            for pid, token in combo:
                pattern = ins_map.get((pid, tid))
                if not pattern:
                    continue
                binding = _match_pattern(pattern, token, binding, env)
                if binding is None:
                    ok = False
                    break
            if not ok:
                continue
            # remaining variables resolve from consumed token fields, the
            # frame env, then declared domains
            merged_fields = {}
            for _, token in combo:
                merged_fields.update(token.field_map())
            pattern_vars = set()
            for pid, _ in combo:
                for expr in ins_map.get((pid, tid), ()):
                    pattern_vars.add(expr.name)
            needed = (_needed_vars(struct, tid) | pattern_vars)
            enum_vars = []
            for name in sorted(needed):
                if name in binding or name in env:
                    continue
                if name in merged_fields:
                    binding[name] = merged_fields[name]
                    continue
                domain = _effective_domain(state.ws, name)
                if domain is None:
                    raise UnboundFreeVariable(name)
                enum_vars.append((name, domain))
            for values in product(*(d for _, d in enum_vars)):
                full = dict(binding)
                full.update({n: v for (n, _), v in zip(enum_vars, values)})
                scope = {**env, **full}
                cond = cond_map.get(tid)
                if cond is not None and not guards.eval_condition(cond, scope):
                    continue
                results.append((tid, full, combo))
    results.sort(key=lambda r: (natural_key(r[0]), sorted(r[1].items(),
                                                          key=repr)))
    return results


def enabled(state: SimState):
    """The (transition, binding) pairs fireable in the current marking."""
    return [(tid, binding) for tid, binding, _ in _enabled_detail(state)]


# --- Firing ----------------------------------------------------------------

def fire(state: SimState, tid: str, binding: dict) -> SimState:
    detail = None
    for cand_tid, cand_binding, combo in _enabled_detail(state):
        if cand_tid == tid and cand_binding == dict(binding):
            detail = (cand_binding, combo)
            break
    if detail is None:
        raise NotEnabled(f"{tid} with binding {dict(binding)!r}")
    binding, combo = detail

    struct = state.ws.net.internal
    env = state.env_map()
    attrs = {a.name for a in state.ws.net.gsp.attributes}
    scope = {**env, **binding}
    actions = struct.action_map().get(tid, ())
    for assign in actions:
        if assign.target not in attrs and assign.target not in scope:
            raise guards.UnboundVariable(assign.target)
    scope2 = guards.eval_action(actions, scope)
    assigned = {a.target for a in actions}
    new_env = dict(env)
    for name in attrs:
        if name in scope2 and (name in new_env or name in assigned):
            new_env[name] = scope2[name]

    marking = {pid: list(toks) for pid, toks in state.marking}
    consumed_log = []
    for pid, token in combo:
        marking[pid].remove(token)
        consumed_log.append((pid, token.fields))

    ins_map = struct.inscription_map()
    place_map = struct.place_map()
    produced_log = []
    merged = {}
    for _, token in combo:
        merged.update(token.field_map())
    for name in assigned:
        if name in merged:
            merged[name] = scope2[name]
    for q in struct.post(tid):
        ins = ins_map.get((tid, q))
        if ins:
            fields = {}
            for i, expr in enumerate(ins):
                name = expr.name if isinstance(expr, guards.Var) else f"_{i + 1}"
                fields[name] = guards.eval_expr(expr, scope2)
        else:
            fields = dict(merged)
        token = Token.make(fields,
                           returned=place_map[q].kind is not PlaceKind.ISP)
        marking.setdefault(q, []).append(token)
        produced_log.append((q, token.fields))

    event = FiringEvent(state.depth, tid, tuple(sorted(binding.items())),
                        tuple(consumed_log), tuple(produced_log))
    new_state = replace(state, marking=_freeze_marking(marking),
                        env=_freeze_env(new_env),
                        trace=state.trace + (event,))
    return _settle(new_state)


# --- ISP invocation --------------------------------------------------------

def _pending_isps(state: SimState):
    place_map = state.ws.net.internal.place_map()
    out = []
    for pid, toks in state.marking:
        if place_map[pid].kind is PlaceKind.ISP and any(
                not t.returned for t in toks):
            out.append(pid)
    return sorted(out, key=natural_key)


def _settle(state: SimState) -> SimState:
    while True:
        pending = _pending_isps(state)
        if not pending:
            return state
        state = invoke_isp(state, pending[0])


def invoke_isp(state: SimState, pid: str) -> SimState:
    place = state.ws.net.internal.place_map()[pid]
    marking = {p: list(toks) for p, toks in state.marking}
    token = next(t for t in marking[pid] if not t.returned)

    if state.depth + 1 > state.config.depth_limit:
        raise DepthLimitExceeded(
            f"invocation depth {state.depth + 1} exceeds the limit "
            f"{state.config.depth_limit}")
    if state.registry is None:
        from .errors import UnknownService
        raise UnknownService(place.invoked_gnet)
    svc = state.registry.lookup(place.invoked_gnet)
    method = svc.net.gsp.method(place.using_method)
    if method is None:
        if place.using_method == "main":
            method = algebra.main_method(svc)
        else:
            raise UnknownMethod(svc.name, place.using_method)

    fields = token.field_map()
    args = []
    for pname, _ in method.params:
        if pname not in fields:
            raise ArityMismatch(
                f"ISP token lacks field {pname!r} required by "
                f"{svc.name}.{method.name}")
        args.append(fields[pname])

    sub = init_state(svc, method.name, args, registry=state.registry,
                     config=state.config, depth=state.depth + 1)
    sub, outcome = run(sub)
    if outcome != GOAL:
        raise SubnetDeadlock(
            f"invoked method {svc.name}.{method.name} reached no goal "
            f"({outcome})")

    sub_marking = sub.marking_map()
    result_fields = dict(fields)
    for g in sorted(method.goal_places, key=natural_key):
        for tok in sub_marking.get(g, ()):
            result_fields.update(tok.field_map())
    marking[pid].remove(token)
    marking[pid].append(Token.make(result_fields, returned=True))
    return replace(state, marking=_freeze_marking(marking),
                   trace=state.trace + sub.trace)


# --- Runs ------------------------------------------------------------------

def _at_goal(state: SimState) -> bool:
    method = state.ws.net.gsp.method(state.method_name)
    marking = state.marking_map()
    return any(any(t.returned for t in marking.get(g, ()))
               for g in method.goal_places)


def run(state: SimState, policy: str = None, max_steps: int = None,
        seed: int = None):
    """Fire until a goal marking, a deadlock or the step limit.  Returns the
    final state and one of GOAL / DEADLOCK / STEP_LIMIT."""
    policy = policy if policy is not None else state.config.policy
    max_steps = max_steps if max_steps is not None else state.config.max_steps
    seed = seed if seed is not None else state.config.seed
    if max_steps <= 0:
        raise ValueError("max_steps must be positive")
    for step in range(max_steps):
        if _at_goal(state):
            return state, GOAL
        choices = enabled(state)
        if not choices:
            return state, DEADLOCK
        if policy == "random":
            rng = random.Random(f"{seed}:{step}:{len(state.trace)}")
            tid, binding = rng.choice(choices)
        else:
            tid, binding = choices[0]
        state = fire(state, tid, binding)
    if _at_goal(state):
        return state, GOAL
    return state, STEP_LIMIT


def format_trace(state: SimState):
    """Line-oriented rendering of the recorded firing events."""
    lines = []
    for ev in state.trace:
        binding = ", ".join(f"{k}={v!r}" for k, v in ev.binding)
        consumed = " ".join(f"-{p}{dict(f)!r}" for p, f in ev.consumed)
        produced = " ".join(f"+{p}{dict(f)!r}" for p, f in ev.produced)
        lines.append(f"{ev.depth} {ev.transition} [{binding}] "
                     f"{consumed} {produced}".rstrip())
    return lines
