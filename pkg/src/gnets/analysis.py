"""Verification pipeline: ISP inlining, flattening to a predicate/transition
net with place splitting, and explicit-state reachability analysis.

Each source place p splits into p·f and p·l with an internal copy transition
T_p; source transitions consume from the l side and produce to the f side.
Transition actions are compiled into the output tuple expressions, so the
flat net needs no separate attribute environment.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace
from itertools import product

from . import algebra, guards
from .errors import (DepthLimitExceeded, UnboundFreeVariable,
                     UnflattenableIsp, UnknownMethod)
from .model import (GNetModel, InternalStructure, Place, PlaceKind, Registry,
                    TauLabel, WebService, natural_key)
from .model import RENAME_SEP, TAU

# --- ISP inlining ----------------------------------------------------------


@dataclass(frozen=True)
class InlineResult:
    service: WebService
    regions: dict  # original ISP place id -> frozenset of inlined place ids


def restrict_to_method(ws: WebService, method_name: str):
    """The sub-structure realizing one method: nodes forward-reachable from
    its initial place and backward-reachable from its goal places."""
    method = ws.net.gsp.method(method_name)
    if method is None:
        raise UnknownMethod(ws.name, method_name)
    struct = ws.net.internal
    succ, pred = {}, {}
    for a, b in struct.arcs:
        succ.setdefault(a, set()).add(b)
        pred.setdefault(b, set()).add(a)

    def closure(seeds, adjacency):
        seen = set(seeds)
        stack = list(seeds)
        while stack:
            n = stack.pop()
            for m in adjacency.get(n, ()):
                if m not in seen:
                    seen.add(m)
                    stack.append(m)
        return seen

    fwd = closure({method.init_place}, succ)
    bwd = closure(set(method.goal_places), pred)
    keep = fwd & bwd
    keep_places = {p.id for p in struct.places if p.id in keep}
    # drop transitions whose presets leak outside the kept region
    keep_trans = {t for t in struct.transitions if t in keep
                  and all(p in keep_places for p in struct.pre(t))}
    nodes = keep_places | keep_trans
    sub = InternalStructure(
        places=tuple(p for p in struct.places if p.id in keep_places),
        transitions=tuple(t for t in struct.transitions if t in keep_trans),
        arcs=tuple((a, b) for a, b in struct.arcs
                   if a in nodes and b in nodes),
        inscriptions=tuple(((a, b), ins) for (a, b), ins in struct.inscriptions
                           if a in nodes and b in nodes),
        conditions=tuple((t, c) for t, c in struct.conditions
                         if t in keep_trans),
        actions=tuple((t, a) for t, a in struct.actions if t in keep_trans),
        labels=tuple((p, lab) for p, lab in struct.labels
                     if p in keep_places),
    )
    return method, sub


def _rename_structure(struct: InternalStructure, suffix: str):
    def rn(ident):
        return f"{ident}{RENAME_SEP}{suffix}"

    return rn, InternalStructure(
        places=tuple(replace(p, id=rn(p.id)) for p in struct.places),
        transitions=tuple(rn(t) for t in struct.transitions),
        arcs=tuple((rn(a), rn(b)) for a, b in struct.arcs),
        inscriptions=tuple(((rn(a), rn(b)), ins)
                           for (a, b), ins in struct.inscriptions),
        conditions=tuple((rn(t), c) for t, c in struct.conditions),
        actions=tuple((rn(t), a) for t, a in struct.actions),
        labels=tuple((rn(p), lab) for p, lab in struct.labels),
    )


def _rename_variables(struct: InternalStructure, mapping: dict):
    if not mapping:
        return struct
    subst = {old: guards.Var(new) for old, new in mapping.items()}

    def fix_cond(c):
        if isinstance(c, guards.Atom):
            return guards.Atom(guards.subst_expr(c.expr, subst))
        if isinstance(c, guards.Compare):
            return guards.Compare(guards.subst_expr(c.left, subst), c.op,
                                  guards.subst_expr(c.right, subst))
        if isinstance(c, guards.Not):
            return guards.Not(fix_cond(c.operand))
        if isinstance(c, guards.And):
            return guards.And(fix_cond(c.left), fix_cond(c.right))
        return guards.Or(fix_cond(c.left), fix_cond(c.right))

    return replace(
        struct,
        inscriptions=tuple((key, tuple(guards.subst_expr(e, subst)
                                       for e in ins))
                           for key, ins in struct.inscriptions),
        conditions=tuple((t, fix_cond(c)) for t, c in struct.conditions),
        actions=tuple((t, tuple(guards.Assign(mapping.get(a.target, a.target),
                                              guards.subst_expr(a.expr, subst))
                                for a in acts))
                      for t, acts in struct.actions),
    )


def inline_isps(ws: WebService, reg: Registry, depth_limit: int = 16
                ) -> InlineResult:
    """Repeatedly replace ISP places by renamed copies of the invoked
    method's subnet until none remain."""
    service = ws
    regions: dict[str, set] = {}
    counter = 0
    rounds = 0
    while True:
        struct = service.net.internal
        isps = sorted((p for p in struct.places if p.kind is PlaceKind.ISP),
                      key=lambda p: natural_key(p.id))
        if not isps:
            break
        rounds += 1
        if rounds > depth_limit:
            raise DepthLimitExceeded(
                f"ISP inlining did not terminate within {depth_limit} rounds")
        for isp in isps:
            struct = service.net.internal
            if isp.id not in struct.place_ids():
                continue
            counter += 1
            suffix = f"i{counter}"
            svc = reg.lookup(isp.invoked_gnet)
            method = svc.net.gsp.method(isp.using_method)
            if method is None and isp.using_method == "main":
                method = algebra.main_method(svc)
            if method is None:
                raise UnknownMethod(svc.name, isp.using_method)
            method, sub = restrict_to_method(svc, method.name)

            # avoid attribute-name capture between host and spliced subnet
            host_attrs = {a.name for a in service.net.gsp.attributes}
            var_map = {a.name: f"{a.name}{RENAME_SEP}{suffix}"
                       for a in svc.net.gsp.attributes
                       if a.name in host_attrs}
            sub = _rename_variables(sub, var_map)
            rn, sub = _rename_structure(sub, suffix)

            service = _splice(service, isp.id, sub,
                              rn(method.init_place),
                              {rn(g) for g in method.goal_places})
            new_attrs = tuple(
                replace(a, name=var_map.get(a.name, a.name))
                for a in svc.net.gsp.attributes)
            gsp = service.net.gsp
            existing = {a.name for a in gsp.attributes}
            merged = gsp.attributes + tuple(a for a in new_attrs
                                            if a.name not in existing)
            service = replace(service,
                              net=GNetModel(replace(gsp, attributes=merged),
                                            service.net.internal))

            spliced = {p.id for p in sub.places}
            for members in regions.values():
                if isp.id in members:
                    members.discard(isp.id)
                    members.update(spliced)
            regions[isp.id] = set(spliced)
    return InlineResult(service,
                        {k: frozenset(v) for k, v in regions.items()})


def _splice(service: WebService, removed: str, sub: InternalStructure,
            init_place: str, goal_places: set) -> WebService:
    struct = service.net.internal
    ins_map = struct.inscription_map()
    sub_places = []
    sub_labels = dict(sub.labels)
    for p in sub.places:
        if p.id in goal_places:
            sub_places.append(replace(p, kind=PlaceKind.NORMAL))
            sub_labels[p.id] = TAU
        else:
            sub_places.append(p)

    new_arcs = []
    new_ins = {}
    for a, b in struct.arcs:
        if a == removed:
            for g in sorted(goal_places, key=natural_key):
                new_arcs.append((g, b))
                if (a, b) in ins_map:
                    new_ins.setdefault((g, b), ins_map[(a, b)])
        elif b == removed:
            new_arcs.append((a, init_place))
            if (a, b) in ins_map:
                new_ins.setdefault((a, init_place), ins_map[(a, b)])
        else:
            new_arcs.append((a, b))
            if (a, b) in ins_map:
                new_ins[(a, b)] = ins_map[(a, b)]
    new_arcs.extend(sub.arcs)
    new_ins.update(sub.inscription_map())
    new_arcs = list(dict.fromkeys(new_arcs))

    methods = []
    for m in service.net.gsp.methods:
        init = init_place if m.init_place == removed else m.init_place
        methods.append(replace(m, init_place=init))

    new_struct = InternalStructure(
        places=tuple(p for p in struct.places if p.id != removed)
        + tuple(sub_places),
        transitions=struct.transitions + sub.transitions,
        arcs=tuple(new_arcs),
        inscriptions=tuple(sorted(new_ins.items())),
        conditions=struct.conditions + sub.conditions,
        actions=struct.actions + sub.actions,
        labels=tuple((p, lab) for p, lab in struct.labels if p != removed)
        + tuple(sorted(sub_labels.items())),
    )
    gsp = replace(service.net.gsp, methods=tuple(methods))
    return replace(service, net=GNetModel(gsp, new_struct))


# --- Flattening ------------------------------------------------------------


@dataclass(frozen=True)
class FlatPlace:
    name: str
    signature: tuple  # tuple[str, ...]


@dataclass(frozen=True)
class FlatTransition:
    name: str
    inputs: tuple  # tuple[(place, pattern vars), ...]
    outputs: tuple  # tuple[(place, exprs), ...]
    gate: object = guards.TRUE
    origin: str = None  # source transition id, None for copy transitions


@dataclass(frozen=True)
class Unresolved:
    """Initial-marking field whose value must be drawn from a domain."""
    name: str


@dataclass
class FlatNet:
    places: dict  # name -> FlatPlace
    transitions: list  # [FlatTransition]
    initial: dict  # place name -> list of token tuples (may hold Unresolved)
    domains: dict  # var -> tuple of values

    def initial_markings(self):
        """All concrete initial markings, enumerating unresolved fields over
        their declared domains."""
        unresolved = []
        for tokens in self.initial.values():
            for tok in tokens:
                for v in tok:
                    if isinstance(v, Unresolved) and v.name not in [
                            u for u, _ in unresolved]:
                        if v.name not in self.domains:
                            raise UnboundFreeVariable(v.name)
                        unresolved.append((v.name, self.domains[v.name]))
        out = []
        for values in product(*(d for _, d in unresolved)):
            env = {n: val for (n, _), val in zip(unresolved, values)}
            marking = {}
            for pname, tokens in self.initial.items():
                marking[pname] = [
                    tuple(env[v.name] if isinstance(v, Unresolved) else v
                          for v in tok)
                    for tok in tokens]
            out.append(marking)
        return out


def flat_name(pid: str, side: str) -> str:
    return f"{pid}{side}"


def flatten(ws: WebService, method_name: str = None, args: dict = None
            ) -> FlatNet:
    """Compile an ISP-free service to a predicate/transition net with
    f/l place splitting."""
    struct = ws.net.internal
    for p in struct.places:
        if p.kind is PlaceKind.ISP:
            raise UnflattenableIsp(f"place {p.id} is still an ISP; inline first")
    method = (ws.net.gsp.method(method_name) if method_name
              else algebra.main_method(ws))
    if method is None:
        raise UnknownMethod(ws.name, method_name)
    args = dict(args or {})

    attrs = ws.net.gsp.attributes
    default_sig = tuple(n for n, _ in method.params) + \
        tuple(a.name for a in attrs)

    ins_map = struct.inscription_map()
    signatures = {}
    for p in struct.places:
        names = []
        for key in sorted(ins_map, key=lambda k: (natural_key(k[0]),
                                                  natural_key(k[1]))):
            if p.id not in key:
                continue
            ins = ins_map[key]
            if all(isinstance(e, guards.Var) for e in ins):
                for e in ins:
                    if e.name not in names:
                        names.append(e.name)
        signatures[p.id] = tuple(names) if names else default_sig

    places = {}
    transitions = []
    for p in struct.places:
        sig = signatures[p.id]
        pf, pl = flat_name(p.id, "f"), flat_name(p.id, "l")
        places[pf] = FlatPlace(pf, sig)
        places[pl] = FlatPlace(pl, sig)
        transitions.append(FlatTransition(
            name=f"T_{p.id}",
            inputs=((pf, sig),),
            outputs=((pl, tuple(guards.Var(v) for v in sig)),),
            gate=guards.TRUE,
            origin=None))

    cond_map = struct.condition_map()
    act_map = struct.action_map()
    for t in struct.transitions:
        compiled = guards.compile_actions(act_map.get(t, ()))
        inputs = tuple((flat_name(p, "l"), signatures[p])
                       for p in struct.pre(t))
        outputs = []
        for q in struct.post(t):
            sig = signatures[q]
            ins = ins_map.get((t, q))
            if ins and len(ins) == len(sig):
                base = ins
            else:
                base = tuple(guards.Var(v) for v in sig)
            outputs.append((flat_name(q, "f"),
                            tuple(guards.subst_expr(e, {
                                k: v for k, v in compiled.items()})
                                for e in base)))
        transitions.append(FlatTransition(
            name=t, inputs=inputs, outputs=tuple(outputs),
            gate=cond_map.get(t, guards.TRUE), origin=t))

    domains = {}
    for a in attrs:
        if a.domain is not None:
            domains[a.name] = tuple(a.domain)
        elif a.value_type == "bool":
            domains[a.name] = (False, True)

    attr_map = {a.name: a for a in attrs}
    init_sig = signatures[method.init_place]
    token = []
    for v in init_sig:
        if v in args:
            token.append(args[v])
        elif v in attr_map and attr_map[v].initial is not None:
            token.append(attr_map[v].initial)
        else:
            token.append(Unresolved(v))
    initial = {flat_name(method.init_place, "f"): [tuple(token)]}
    return FlatNet(places=places, transitions=transitions, initial=initial,
                   domains=domains)


def flat_goal_places(method) -> set:
    out = set()
    for g in method.goal_places:
        out.add(flat_name(g, "f"))
        out.add(flat_name(g, "l"))
    return out


# --- Reachability ----------------------------------------------------------


def canonical_marking(marking: dict) -> tuple:
    out = []
    for pname in sorted(marking, key=natural_key):
        toks = tuple(sorted(marking[pname], key=repr))
        if toks:
            out.append((pname, toks))
    return tuple(out)


@dataclass
class StateGraph:
    nodes: dict = field(default_factory=dict)  # key -> marking dict
    edges: list = field(default_factory=list)  # (src, label, binding, dst)
    out: dict = field(default_factory=dict)  # key -> [edge index]
    initial: tuple = None
    truncated: bool = False

    def add_node(self, key, marking):
        if key not in self.nodes:
            self.nodes[key] = marking
            self.out[key] = []
            return True
        return False

    def add_edge(self, src, label, binding, dst):
        self.edges.append((src, label, binding, dst))
        self.out[src].append(len(self.edges) - 1)


def flat_successors(flat: FlatNet, marking: dict):
    """All (transition name, binding, successor marking) triples."""
    results = []
    for t in flat.transitions:
        pools = []
        for pname, pattern in t.inputs:
            toks = marking.get(pname, ())
            if not toks:
                pools = None
                break
            pools.append([(pname, tok) for tok in sorted(set(toks), key=repr)])
        if pools is None:
            continue
        for combo in product(*pools):
            binding = {}
            ok = True
            for (pname, tok), (_, pattern) in zip(combo, t.inputs):
                if len(pattern) != len(tok):
                    ok = False
                    break
                for var, value in zip(pattern, tok):
                    if var in binding and binding[var] != value:
                        ok = False
                        break
                    binding[var] = value
                if not ok:
                    break
            if not ok:
                continue
            needed = set(guards.condition_vars(t.gate))
            for _, exprs in t.outputs:
                for e in exprs:
                    needed |= guards.expr_vars(e)
            enum_vars = []
            for name in sorted(needed - set(binding)):
                if name not in flat.domains:
                    raise UnboundFreeVariable(name)
                enum_vars.append((name, flat.domains[name]))
            for values in product(*(d for _, d in enum_vars)):
                full = dict(binding)
                full.update({n: v for (n, _), v in zip(enum_vars, values)})
                if not guards.eval_condition(t.gate, full):
                    continue
                succ = {p: list(toks) for p, toks in marking.items()}
                for pname, tok in combo:
                    succ[pname].remove(tok)
                for pname, exprs in t.outputs:
                    succ.setdefault(pname, []).append(
                        tuple(guards.eval_expr(e, full) for e in exprs))
                results.append((t.name, tuple(sorted(full.items())), succ))
    results.sort(key=lambda r: (natural_key(r[0]), repr(r[1])))
    return results


def reachability(flat: FlatNet, max_states: int = 100000,
                 max_tokens_per_place: int = None,
                 initial: dict = None) -> StateGraph:
    """Breadth-first exhaustive exploration with canonical deduplication."""
    if max_states <= 0:
        raise ValueError("max_states must be positive")
    if initial is None:
        markings = flat.initial_markings()
        if len(markings) != 1:
            raise UnboundFreeVariable(
                "initial marking is not unique; pass one explicitly")
        initial = markings[0]
    graph = StateGraph()
    key0 = canonical_marking(initial)
    graph.initial = key0
    graph.add_node(key0, initial)
    queue = deque([key0])
    while queue:
        key = queue.popleft()
        marking = graph.nodes[key]
        for tname, binding, succ in flat_successors(flat, marking):
            if max_tokens_per_place is not None and any(
                    len(toks) > max_tokens_per_place
                    for toks in succ.values()):
                graph.truncated = True
                continue
            skey = canonical_marking(succ)
            if skey not in graph.nodes:
                if len(graph.nodes) >= max_states:
                    graph.truncated = True
                    continue
                graph.add_node(skey, succ)
                queue.append(skey)
            graph.add_edge(key, tname, binding, skey)
    return graph


def explore_service(ws: WebService, method_name: str = None, args=(),
                    max_states: int = 100000) -> StateGraph:
    """Exhaustive state graph of an ISP-free service at the token-game level
    (states pair the marking with the attribute environment)."""
    from . import sim
    for p in ws.net.internal.places:
        if p.kind is PlaceKind.ISP:
            raise UnflattenableIsp(
                f"place {p.id} is an ISP; inline before exploring")
    method_name = method_name or algebra.main_method(ws).name
    state0 = sim.init_state(ws, method_name, args)

    def key_of(state):
        return (state.marking, state.env)

    def marking_of(state):
        return {pid: list(toks) for pid, toks in state.marking}

    graph = StateGraph()
    graph.initial = key_of(state0)
    graph.add_node(graph.initial, marking_of(state0))
    queue = deque([(graph.initial, state0)])
    seen = {graph.initial}
    while queue:
        key, state = queue.popleft()
        for tid, binding in sim.enabled(state):
            succ = sim.fire(state, tid, binding)
            skey = key_of(succ)
            if skey not in seen:
                if len(graph.nodes) >= max_states:
                    graph.truncated = True
                    continue
                seen.add(skey)
                graph.add_node(skey, marking_of(succ))
                queue.append((skey, succ))
            graph.add_edge(key, tid, tuple(sorted(binding.items())), skey)
    return graph


# --- Property analysis -----------------------------------------------------


@dataclass
class AnalysisReport:
    state_count: int
    deadlocks: list
    bound_k: int
    goal_reachable: bool
    witness: list  # edge labels along a shortest path to a goal state
    truncated: bool

    def to_text(self):
        lines = [
            f"stateCount: {self.state_count}",
            f"deadlocks: {len(self.deadlocks)}",
            f"boundK: {self.bound_k}",
            f"goalReachable: {self.goal_reachable}",
            f"truncated: {self.truncated}",
        ]
        if self.goal_reachable:
            lines.append("witness: " + " ".join(self.witness))
        for d in self.deadlocks:
            lines.append("deadlock: " + _marking_text(d))
        return "\n".join(lines)


def _marking_text(key):
    if isinstance(key, tuple) and len(key) == 2 and all(
            isinstance(part, tuple) for part in key):
        marking = key[0]
    else:
        marking = key
    return repr(marking)


def _tokens_in(marking: dict, places: set) -> bool:
    return any(marking.get(p) for p in places)


def analyze(graph: StateGraph, goal_places: set) -> AnalysisReport:
    deadlocks = []
    bound_k = 0
    for key, marking in graph.nodes.items():
        for toks in marking.values():
            bound_k = max(bound_k, len(toks))
        if not graph.out[key] and not _tokens_in(marking, goal_places):
            deadlocks.append(key)

    # shortest witness to any goal state
    witness = None
    dist = {graph.initial: (0, [])}
    queue = deque([graph.initial])
    if _tokens_in(graph.nodes[graph.initial], goal_places):
        witness = []
    while queue and witness is None:
        key = queue.popleft()
        d, path = dist[key]
        for idx in graph.out[key]:
            _, label, _, dst = graph.edges[idx]
            if dst not in dist:
                dist[dst] = (d + 1, path + [label])
                if _tokens_in(graph.nodes[dst], goal_places):
                    witness = path + [label]
                    break
                queue.append(dst)
    return AnalysisReport(
        state_count=len(graph.nodes),
        deadlocks=deadlocks,
        bound_k=bound_k,
        goal_reachable=witness is not None,
        witness=witness or [],
        truncated=graph.truncated,
    )


# --- Run languages (used by equivalence checks) ----------------------------


def flat_run_language(flat: FlatNet, initial: dict, max_len: int = 40,
                      max_runs: int = 20000) -> set:
    """The set of origin-transition firing sequences of maximal runs, with
    internal copy transitions erased."""
    out = set()
    stack = [(canonical_marking(initial), initial, ())]
    seen_prefix = set()
    while stack:
        key, marking, word = stack.pop()
        if (key, word) in seen_prefix:
            continue
        seen_prefix.add((key, word))
        succs = flat_successors(flat, marking)
        if not succs:
            out.add(word)
            continue
        if len(word) >= max_len:
            out.add(word)
            continue
        for tname, _, succ in succs:
            origin = next((t.origin for t in flat.transitions
                           if t.name == tname), None)
            new_word = word + (origin,) if origin else word
            stack.append((canonical_marking(succ), succ, new_word))
        if len(out) > max_runs:
            raise RuntimeError("run language too large")
    return out
