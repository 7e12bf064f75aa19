"""Core data model: web services, their interface (methods/attributes) and
the internal bipartite net, plus structural validation and renaming.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

from . import guards
from .errors import DuplicateService, UnknownBlock, UnknownService

# Separator reserved for freshness-preserving renames; forbidden in user ids.
RENAME_SEP = "§"  # §


def natural_key(ident: str):
    """Sort key that orders p2 before p10."""
    return tuple(int(part) if part.isdigit() else part
                 for part in re.split(r"(\d+)", ident))


class PlaceKind(Enum):
    NORMAL = "normal"
    GOAL = "goal"
    ISP = "isp"


@dataclass(frozen=True)
class OpLabel:
    name: str


@dataclass(frozen=True)
class TauLabel:
    pass


@dataclass(frozen=True)
class GoalLabel:
    pass


@dataclass(frozen=True)
class IspRef:
    service: str
    method: str


TAU = TauLabel()
GOAL = GoalLabel()


@dataclass(frozen=True)
class Place:
    id: str
    kind: PlaceKind = PlaceKind.NORMAL
    invoked_gnet: Optional[str] = None
    using_method: Optional[str] = None


@dataclass(frozen=True)
class MethodSpec:
    name: str
    description: str = ""
    params: tuple = ()  # tuple[(name, description), ...]
    init_place: str = ""
    goal_places: frozenset = frozenset()


@dataclass(frozen=True)
class AttributeSpec:
    name: str
    value_type: str  # int | bool | string
    initial: object = None
    domain: Optional[tuple] = None


_TYPE_CHECK = {
    "int": lambda v: type(v) is int,
    "bool": lambda v: type(v) is bool,
    "string": lambda v: type(v) is str,
}


@dataclass(frozen=True)
class GspSpec:
    methods: tuple = ()
    attributes: tuple = ()

    def method(self, name):
        for m in self.methods:
            if m.name == name:
                return m
        return None

    def attribute(self, name):
        for a in self.attributes:
            if a.name == name:
                return a
        return None


@dataclass(frozen=True)
class InternalStructure:
    places: tuple = ()  # tuple[Place, ...]
    transitions: tuple = ()  # tuple[str, ...]
    arcs: tuple = ()  # tuple[(src, tgt), ...]
    inscriptions: tuple = ()  # tuple[((src, tgt), Inscription), ...]
    conditions: tuple = ()  # tuple[(tid, Condition), ...]
    actions: tuple = ()  # tuple[(tid, ActionSeq), ...]
    labels: tuple = ()  # tuple[(pid, Label), ...]

    # -- dict-style views (constructed lazily, cached per instance) --------
    def place_map(self):
        return {p.id: p for p in self.places}

    def inscription_map(self):
        return dict(self.inscriptions)

    def condition_map(self):
        return dict(self.conditions)

    def action_map(self):
        return dict(self.actions)

    def label_map(self):
        return dict(self.labels)

    def place_ids(self):
        return {p.id for p in self.places}

    def pre(self, tid):
        return sorted((s for s, t in self.arcs if t == tid), key=natural_key)

    def post(self, tid):
        return sorted((t for s, t in self.arcs if s == tid), key=natural_key)

    def pre_place(self, pid):
        return sorted((s for s, t in self.arcs if t == pid), key=natural_key)

    def post_place(self, pid):
        return sorted((t for s, t in self.arcs if s == pid), key=natural_key)


@dataclass(frozen=True)
class GNetModel:
    gsp: GspSpec = GspSpec()
    internal: InternalStructure = InternalStructure()


@dataclass(frozen=True)
class WebService:
    name: str
    desc: str = ""
    loc: Optional[str] = None
    url: Optional[str] = None
    component_services: frozenset = frozenset()
    net: GNetModel = GNetModel()

    @property
    def is_basic(self):
        return self.component_services == frozenset({self.name})


@dataclass(frozen=True)
class Token:
    fields: tuple = ()  # tuple[(name, value), ...], sorted by name
    returned: bool = True

    @staticmethod
    def make(fields: dict, returned=True):
        return Token(tuple(sorted(fields.items())), returned)

    def field_map(self):
        return dict(self.fields)


@dataclass(frozen=True)
class Violation:
    element: str
    rule: str
    message: str


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations

    def add(self, element, rule, message):
        self.violations.append(Violation(element, rule, message))

    def __str__(self):
        if self.ok:
            return "ok: 0 violations"
        lines = [f"{len(self.violations)} violation(s):"]
        for v in self.violations:
            lines.append(f"  [{v.rule}] {v.element}: {v.message}")
        return "\n".join(lines)


def validate(ws: WebService) -> ValidationReport:
    """Check every structural invariant of the service model; violations are
    reported as data, never raised."""
    report = ValidationReport()
    if not ws.name:
        report.add("service", "empty-name", "service name must be non-empty")
    if not ws.component_services:
        report.add("service", "empty-cs", "componentServices must be non-empty")

    net = ws.net
    struct = net.internal
    place_map = struct.place_map()
    pids = set(place_map)
    tids = set(struct.transitions)
    labels = struct.label_map()

    if len(place_map) != len(struct.places):
        report.add("places", "duplicate-place", "duplicate place ids")
    if len(tids) != len(struct.transitions):
        report.add("transitions", "duplicate-transition", "duplicate transition ids")
    if pids & tids:
        report.add("net", "id-clash",
                   f"ids used as both place and transition: {sorted(pids & tids)}")

    for src, tgt in struct.arcs:
        src_p, tgt_p = src in pids, tgt in pids
        src_t, tgt_t = src in tids, tgt in tids
        if not ((src_p or src_t) and (tgt_p or tgt_t)):
            report.add(f"arc {src}->{tgt}", "dangling-arc",
                       "arc endpoint does not exist")
        elif not ((src_p and tgt_t) or (src_t and tgt_p)):
            report.add(f"arc {src}->{tgt}", "non-bipartite arc",
                       "arcs must connect a place to a transition or vice versa")

    if set(labels) != pids:
        missing = sorted(pids - set(labels))
        extra = sorted(set(labels) - pids)
        report.add("labels", "label-domain",
                   f"label map must cover exactly the places "
                   f"(missing={missing}, extra={extra})")

    for p in struct.places:
        label = labels.get(p.id)
        if p.kind is PlaceKind.ISP:
            if p.invoked_gnet is None or p.using_method is None:
                report.add(p.id, "ISP missing invocation target",
                           "ISP places require invokedGnet and usingMethod")
            if not isinstance(label, IspRef):
                report.add(p.id, "isp-label", "ISP places must carry an ISP label")
            elif (p.invoked_gnet is not None
                  and (label.service != p.invoked_gnet
                       or label.method != p.using_method)):
                report.add(p.id, "isp-label-mismatch",
                           f"label {label} disagrees with place fields "
                           f"({p.invoked_gnet}.{p.using_method})")
        else:
            if p.invoked_gnet is not None or p.using_method is not None:
                report.add(p.id, "isp-fields-on-non-isp",
                           "only ISP places may carry invocation fields")
            if isinstance(label, IspRef):
                report.add(p.id, "isp-label", "ISP label on a non-ISP place")
        if p.kind is PlaceKind.GOAL and not isinstance(label, GoalLabel):
            report.add(p.id, "goal-label", "goal places must carry the goal label")
        if p.kind is not PlaceKind.GOAL and isinstance(label, GoalLabel):
            report.add(p.id, "goal-label", "goal label on a non-goal place")

    seen_methods = set()
    for m in net.gsp.methods:
        if m.name in seen_methods:
            report.add(m.name, "duplicate-method", "method names must be unique")
        seen_methods.add(m.name)
        if m.init_place not in pids:
            report.add(m.name, "missing-init", f"init place {m.init_place!r} not in net")
        if not m.goal_places:
            report.add(m.name, "empty-goals", "method must declare goal places")
        for g in m.goal_places:
            if g not in pids:
                report.add(m.name, "missing-goal", f"goal place {g!r} not in net")
            elif place_map[g].kind is not PlaceKind.GOAL:
                report.add(m.name, "goal-kind", f"goal place {g!r} is not Goal-kind")
        single_place_net = len(struct.places) == 1 and not struct.transitions
        if m.init_place in m.goal_places and not single_place_net:
            report.add(m.name, "init-is-goal",
                       "init place may equal a goal place only in the empty net")
        seen_params = set()
        for pname, _ in m.params:
            if pname in seen_params:
                report.add(m.name, "duplicate-param", f"duplicate param {pname!r}")
            seen_params.add(pname)

    seen_attrs = set()
    for a in net.gsp.attributes:
        if a.name in seen_attrs:
            report.add(a.name, "duplicate-attribute", "attribute names must be unique")
        seen_attrs.add(a.name)
        check = _TYPE_CHECK.get(a.value_type)
        if check is None:
            report.add(a.name, "attr-type",
                       f"unknown value type {a.value_type!r}")
            continue
        if a.initial is not None and not check(a.initial):
            report.add(a.name, "attr-initial-type",
                       f"initial {a.initial!r} is not of type {a.value_type}")
        for v in a.domain or ():
            if not check(v):
                report.add(a.name, "attr-domain-type",
                           f"domain member {v!r} is not of type {a.value_type}")

    arc_set = set(struct.arcs)
    for key, _ in struct.inscriptions:
        if key not in arc_set:
            report.add(f"arc {key[0]}->{key[1]}", "inscription-domain",
                       "inscription on a non-existent arc")
        elif key[0] in pids:
            ins = dict(struct.inscriptions)[key]
            if any(not isinstance(e, guards.Var) for e in ins):
                report.add(f"arc {key[0]}->{key[1]}", "input-pattern",
                           "input-arc inscriptions must be variable patterns")
    for tid, _ in struct.conditions:
        if tid not in tids:
            report.add(tid, "condition-domain", "condition on unknown transition")
    for tid, _ in struct.actions:
        if tid not in tids:
            report.add(tid, "action-domain", "action on unknown transition")

    return report


# --- Renaming --------------------------------------------------------------

def rename_apart(ws: WebService, suffix: str) -> WebService:
    """Return an isomorphic service with every place/transition id suffixed,
    guaranteeing disjointness from the original id sets."""
    if not suffix:
        raise ValueError("suffix must be non-empty")

    def rn(ident):
        return f"{ident}{RENAME_SEP}{suffix}"

    struct = ws.net.internal
    new_struct = InternalStructure(
        places=tuple(replace(p, id=rn(p.id)) for p in struct.places),
        transitions=tuple(rn(t) for t in struct.transitions),
        arcs=tuple((rn(s), rn(t)) for s, t in struct.arcs),
        inscriptions=tuple(((rn(s), rn(t)), ins)
                           for (s, t), ins in struct.inscriptions),
        conditions=tuple((rn(t), c) for t, c in struct.conditions),
        actions=tuple((rn(t), a) for t, a in struct.actions),
        labels=tuple((rn(p), lab) for p, lab in struct.labels),
    )
    new_methods = tuple(
        replace(m, init_place=rn(m.init_place),
                goal_places=frozenset(rn(g) for g in m.goal_places))
        for m in ws.net.gsp.methods)
    return replace(ws, net=GNetModel(
        gsp=replace(ws.net.gsp, methods=new_methods),
        internal=new_struct))


# --- Block fragments -------------------------------------------------------

@dataclass(frozen=True)
class BlockFragment:
    structure: InternalStructure

    @property
    def entries(self):
        s = self.structure
        with_in = {t for _, t in s.arcs}
        return sorted((p.id for p in s.places if p.id not in with_in),
                      key=natural_key)

    @property
    def exits(self):
        s = self.structure
        with_out = {src for src, _ in s.arcs}
        return sorted((p.id for p in s.places if p.id not in with_out),
                      key=natural_key)

    def is_well_formed(self):
        s = self.structure
        if not self.entries or not self.exits:
            return False
        # connectivity over the undirected arc graph
        nodes = {p.id for p in s.places} | set(s.transitions)
        if not nodes:
            return False
        adj = {n: set() for n in nodes}
        for a, b in s.arcs:
            if a in adj and b in adj:
                adj[a].add(b)
                adj[b].add(a)
        seen = set()
        stack = [next(iter(sorted(nodes)))]
        while stack:
            n = stack.pop()
            if n in seen:
                continue
            seen.add(n)
            stack.extend(adj[n])
        return seen == nodes


def rename_block(block: BlockFragment, suffix: str) -> BlockFragment:
    def rn(ident):
        return f"{ident}{RENAME_SEP}{suffix}"

    s = block.structure
    return BlockFragment(InternalStructure(
        places=tuple(replace(p, id=rn(p.id)) for p in s.places),
        transitions=tuple(rn(t) for t in s.transitions),
        arcs=tuple((rn(a), rn(b)) for a, b in s.arcs),
        inscriptions=tuple(((rn(a), rn(b)), ins) for (a, b), ins in s.inscriptions),
        conditions=tuple((rn(t), c) for t, c in s.conditions),
        actions=tuple((rn(t), a) for t, a in s.actions),
        labels=tuple((rn(p), lab) for p, lab in s.labels),
    ))


# --- Registry --------------------------------------------------------------

class Registry:
    """Name-indexed store of services and block fragments."""

    def __init__(self):
        self.services: dict[str, WebService] = {}
        self.blocks: dict[str, BlockFragment] = {}

    def insert(self, ws: WebService):
        if ws.name in self.services:
            if self.services[ws.name] == ws:
                return  # idempotent re-registration of the identical value
            raise DuplicateService(ws.name)
        self.services[ws.name] = ws

    def insert_block(self, name: str, block: BlockFragment):
        if name in self.blocks and self.blocks[name] != block:
            raise DuplicateService(name)
        self.blocks[name] = block

    def lookup(self, name: str) -> WebService:
        try:
            return self.services[name]
        except KeyError:
            raise UnknownService(name) from None

    def lookup_block(self, name: str) -> BlockFragment:
        try:
            return self.blocks[name]
        except KeyError:
            raise UnknownBlock(name) from None

    def copy(self):
        out = Registry()
        out.services = dict(self.services)
        out.blocks = dict(self.blocks)
        return out
