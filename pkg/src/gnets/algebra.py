"""The nine-operator composition algebra plus the empty and atomic
constructors.  Every operator returns a fully valid WebService whose net is
the documented fixed skeleton; operand services are referenced through ISP
places by name.
"""

from __future__ import annotations

from dataclasses import replace

from . import guards
from .errors import (EmptyBranchSet, EmptyReplacement, MalformedBlock,
                     MissingReqMethod, UnknownMethod)
from .model import (GOAL, TAU, AttributeSpec, BlockFragment, GNetModel,
                    GoalLabel, GspSpec, InternalStructure, IspRef, MethodSpec,
                    OpLabel, Place, PlaceKind, WebService, rename_block)

EMPTY_NAME = "Empty"


def main_method(ws: WebService) -> MethodSpec:
    """The unique method a bare ISP(S) reference resolves to."""
    candidates = [m for m in ws.net.gsp.methods if m.name != "req"]
    if len(candidates) != 1:
        raise UnknownMethod(ws.name, "<main>")
    return candidates[0]


def main_method_name(ws: WebService) -> str:
    try:
        return main_method(ws).name
    except UnknownMethod:
        return "main"  # placeholder for method-less operands (the empty service)


def is_empty_service(ws: WebService) -> bool:
    struct = ws.net.internal
    return (not ws.net.gsp.methods and len(struct.places) == 1
            and not struct.transitions)


def _isp(pid, ws):
    mname = main_method_name(ws)
    place = Place(pid, PlaceKind.ISP, invoked_gnet=ws.name, using_method=mname)
    return place, IspRef(ws.name, mname)


def empty_service() -> WebService:
    struct = InternalStructure(
        places=(Place("p1"),),
        labels=(("p1", TAU),),
    )
    return WebService(
        name=EMPTY_NAME,
        desc="Empty Web Service",
        component_services=frozenset({EMPTY_NAME}),
        net=GNetModel(gsp=GspSpec(), internal=struct),
    )


def atomic(name: str, op_name: str) -> WebService:
    if not name or not op_name:
        raise ValueError("atomic service and operation names must be non-empty")
    struct = InternalStructure(
        places=(Place("p1"), Place("p2", PlaceKind.GOAL)),
        transitions=("t1",),
        arcs=(("p1", "t1"), ("t1", "p2")),
        labels=(("p1", OpLabel(op_name)), ("p2", GOAL)),
    )
    method = MethodSpec("Atomic", f"perform {op_name}", (), "p1",
                        frozenset({"p2"}))
    return WebService(
        name=name,
        desc=f"atomic service performing {op_name}",
        component_services=frozenset({name}),
        net=GNetModel(gsp=GspSpec(methods=(method,)), internal=struct),
    )


def with_request_method(ws: WebService, echo_field: str = "r") -> WebService:
    """Extend a service with a trivial `req` method so it can participate in
    a selection: a one-transition subnet that echoes the request field."""
    if ws.net.gsp.method("req") is not None:
        return ws
    struct = ws.net.internal
    pids = struct.place_ids() | set(struct.transitions)
    rq1, rq2, rt1 = "rq1", "rq2", "rt1"
    while rq1 in pids or rq2 in pids or rt1 in pids:
        rq1, rq2, rt1 = rq1 + "_", rq2 + "_", rt1 + "_"
    new_struct = replace(
        struct,
        places=struct.places + (Place(rq1), Place(rq2, PlaceKind.GOAL)),
        transitions=struct.transitions + (rt1,),
        arcs=struct.arcs + ((rq1, rt1), (rt1, rq2)),
        inscriptions=struct.inscriptions
        + (((rt1, rq2), (guards.Var(echo_field),)),),
        labels=struct.labels + ((rq1, OpLabel("answer-request")), (rq2, GOAL)),
    )
    req = MethodSpec("req", "answer a selection request",
                     ((echo_field, "request"),), rq1, frozenset({rq2}))
    gsp = replace(ws.net.gsp, methods=ws.net.gsp.methods + (req,))
    return replace(ws, net=GNetModel(gsp=gsp, internal=new_struct))


def _compose_meta(op, operands):
    names = ",".join(s.name for s in operands)
    return {
        "name": f"{op}({names})",
        "desc": f"{op} composition of {names}",
    }


def _union_cs(operands):
    cs = frozenset()
    for s in operands:
        cs |= s.component_services
    return cs


def sequence(s1: WebService, s2: WebService) -> WebService:
    pl1, l1 = _isp("p1", s1)
    pl2, l2 = _isp("p2", s2)
    struct = InternalStructure(
        places=(pl1, pl2, Place("p3", PlaceKind.GOAL)),
        transitions=("t1", "t2"),
        arcs=(("p1", "t1"), ("t1", "p2"), ("p2", "t2"), ("t2", "p3")),
        labels=(("p1", l1), ("p2", l2), ("p3", GOAL)),
    )
    method = MethodSpec("Seq", "run the operands in order", (), "p1",
                        frozenset({"p3"}))
    meta = _compose_meta("Seq", (s1, s2))
    return WebService(component_services=_union_cs((s1, s2)),
                      net=GNetModel(GspSpec(methods=(method,)), struct), **meta)


def alternative(s1: WebService, s2: WebService) -> WebService:
    pl2, l2 = _isp("p2", s1)
    pl3, l3 = _isp("p3", s2)
    struct = InternalStructure(
        places=(Place("p1"), pl2, pl3, Place("p4", PlaceKind.GOAL)),
        transitions=("t1", "t2", "t3", "t4"),
        arcs=(("p1", "t1"), ("t1", "p2"), ("p2", "t3"), ("t3", "p4"),
              ("p1", "t2"), ("t2", "p3"), ("p3", "t4"), ("t4", "p4")),
        labels=(("p1", TAU), ("p2", l2), ("p3", l3), ("p4", GOAL)),
    )
    method = MethodSpec("Alt", "run exactly one operand", (), "p1",
                        frozenset({"p4"}))
    meta = _compose_meta("Alt", (s1, s2))
    return WebService(component_services=_union_cs((s1, s2)),
                      net=GNetModel(GspSpec(methods=(method,)), struct), **meta)


def iteration(s: WebService) -> WebService:
    pl1, l1 = _isp("p1", s)
    struct = InternalStructure(
        places=(pl1, Place("p2", PlaceKind.GOAL)),
        transitions=("t1", "t2"),
        arcs=(("p1", "t1"), ("t1", "p1"), ("p1", "t2"), ("t2", "p2")),
        labels=(("p1", l1), ("p2", GOAL)),
    )
    method = MethodSpec("Iter", "run the operand repeatedly", (), "p1",
                        frozenset({"p2"}))
    meta = _compose_meta("Iter", (s,))
    return WebService(component_services=s.component_services,
                      net=GNetModel(GspSpec(methods=(method,)), struct), **meta)


def arbitrary_sequence(s1: WebService, s2: WebService) -> WebService:
    pl5, l5 = _isp("p5", s1)
    pl6, l6 = _isp("p6", s2)
    places = tuple(Place(f"p{i}") for i in (1, 2, 3, 4)) + (pl5, pl6) + \
        tuple(Place(f"p{i}") for i in (7, 8)) + (Place("p9", PlaceKind.GOAL),)
    arcs = (
        ("p1", "t1"), ("t1", "p2"), ("t1", "p3"), ("t1", "p4"),
        ("p2", "t2"), ("t2", "p5"), ("p5", "t4"), ("t4", "p7"), ("t4", "p3"),
        ("p7", "t6"), ("t6", "p9"), ("p3", "t2"), ("p3", "t3"), ("p3", "t6"),
        ("p4", "t3"), ("t3", "p6"), ("p6", "t5"), ("t5", "p3"), ("t5", "p8"),
        ("p8", "t6"),
    )
    labels = tuple((f"p{i}", TAU) for i in (1, 2, 3, 4, 7, 8)) + \
        (("p5", l5), ("p6", l6), ("p9", GOAL))
    struct = InternalStructure(
        places=places,
        transitions=tuple(f"t{i}" for i in range(1, 7)),
        arcs=arcs,
        labels=labels,
    )
    method = MethodSpec("ArbSeq", "run the operands in either order, never "
                        "concurrently", (), "p1", frozenset({"p9"}))
    meta = _compose_meta("ArbSeq", (s1, s2))
    return WebService(component_services=_union_cs((s1, s2)),
                      net=GNetModel(GspSpec(methods=(method,)), struct), **meta)


def parallel(s1: WebService, s2: WebService) -> WebService:
    pl2, l2 = _isp("p2", s1)
    pl3, l3 = _isp("p3", s2)
    struct = InternalStructure(
        places=(Place("p1"), pl2, pl3, Place("p4", PlaceKind.GOAL)),
        transitions=("t1", "t2"),
        arcs=(("p1", "t1"), ("t1", "p2"), ("t1", "p3"),
              ("p2", "t2"), ("p3", "t2"), ("t2", "p4")),
        labels=(("p1", TAU), ("p2", l2), ("p3", l3), ("p4", GOAL)),
    )
    method = MethodSpec("Par", "run the operands concurrently and join", (),
                        "p1", frozenset({"p4"}))
    meta = _compose_meta("Par", (s1, s2))
    return WebService(component_services=_union_cs((s1, s2)),
                      net=GNetModel(GspSpec(methods=(method,)), struct), **meta)


def discriminator(first_n, last: WebService) -> WebService:
    """Race the first operands; the earliest completion activates `last`,
    late completions are routed straight to the goal."""
    first_n = list(first_n)
    if not first_n:
        raise EmptyBranchSet("discriminator requires at least one racing branch")
    n = len(first_n) + 1

    places = [Place("p1")]
    labels = [("p1", TAU)]
    for i in range(2, n + 1):
        pl, lab = _isp(f"p{i}", first_n[i - 2])
        places.append(pl)
        labels.append((f"p{i}", lab))
    places.append(Place(f"p{n + 1}"))
    labels.append((f"p{n + 1}", TAU))
    pl_last, lab_last = _isp(f"p{n + 2}", last)
    places.append(pl_last)
    labels.append((f"p{n + 2}", lab_last))
    places.append(Place(f"p{n + 3}", PlaceKind.GOAL))
    labels.append((f"p{n + 3}", GOAL))

    arcs = [(f"p{i}", f"t{i}") for i in range(1, n + 3)]
    for i in range(2, n + 1):
        arcs.append(("t1", f"p{i}"))
        arcs.append((f"t{i}", f"p{n + 1}"))
    arcs += [(f"p{n + 1}", f"t{n + 3}"), (f"t{n + 1}", f"p{n + 2}"),
             (f"t{n + 2}", f"p{n + 3}"), (f"t{n + 3}", f"p{n + 3}")]

    b = guards.Var("B")
    inscriptions = (
        (("p1", "t1"), (b,)),
        ((f"p{n + 1}", f"t{n + 1}"), (b,)),
        ((f"p{n + 1}", f"t{n + 3}"), (b,)),
    )
    conditions = (
        (f"t{n + 1}", guards.Compare(b, "==", guards.Lit(True))),
        (f"t{n + 3}", guards.Compare(b, "==", guards.Lit(False))),
    )
    actions = (
        ("t1", (guards.Assign("B", guards.Lit(True)),)),
        (f"t{n + 1}", (guards.Assign("B", guards.Lit(False)),)),
    )
    struct = InternalStructure(
        places=tuple(places),
        transitions=tuple(f"t{i}" for i in range(1, n + 4)),
        arcs=tuple(arcs),
        inscriptions=inscriptions,
        conditions=conditions,
        actions=actions,
        labels=tuple(labels),
    )
    method = MethodSpec("Disc", "first racer to finish triggers the "
                        "continuation", (), "p1", frozenset({f"p{n + 3}"}))
    gsp = GspSpec(methods=(method,),
                  attributes=(AttributeSpec("B", "bool", initial=False),))
    meta = _compose_meta("Disc", tuple(first_n) + (last,))
    return WebService(component_services=_union_cs(tuple(first_n) + (last,)),
                      net=GNetModel(gsp, struct), **meta)


def selection(services, choice: int = 0) -> WebService:
    """Broadcast a request to every operand's `req` method, score the
    responses and run the chosen operand's main method.

    `choice` is the zero-based index the default scorer assigns; the routing
    attribute J is compiled to choice + 1 to match the route guards
    J == i - 2 on transitions t3..t_{n+2}.
    """
    services = list(services)
    if not services:
        raise EmptyBranchSet("selection requires at least one operand")
    if not 0 <= choice < len(services):
        raise ValueError("choice index out of range")
    for s in services:
        if s.net.gsp.method("req") is None:
            raise MissingReqMethod(s.name)
        main_method(s)  # raises UnknownMethod if absent
    n = len(services)

    places = [Place("p1")]
    labels = [("p1", OpLabel("Create-request"))]
    for i in range(2, n + 2):
        svc = services[i - 2]
        pid = f"p{i}"
        places.append(Place(pid, PlaceKind.ISP, invoked_gnet=svc.name,
                            using_method="req"))
        labels.append((pid, IspRef(svc.name, "req")))
    places.append(Place(f"p{n + 2}"))
    labels.append((f"p{n + 2}", OpLabel("Select-Service")))
    for i in range(2, n + 2):
        svc = services[i - 2]
        pid = f"p{i + n + 1}"
        mname = main_method_name(svc)
        places.append(Place(pid, PlaceKind.ISP, invoked_gnet=svc.name,
                            using_method=mname))
        labels.append((pid, IspRef(svc.name, mname)))
    places.append(Place(f"p{2 * n + 3}", PlaceKind.GOAL))
    labels.append((f"p{2 * n + 3}", GOAL))

    arcs = [("p1", "t1"), ("t2", f"p{n + 2}")]
    for i in range(2, n + 2):
        arcs += [("t1", f"p{i}"), (f"p{i}", "t2"),
                 (f"p{n + 2}", f"t{i + 1}"), (f"t{i + 1}", f"p{i + n + 1}"),
                 (f"p{i + n + 1}", f"t{i + n + 1}"),
                 (f"t{i + n + 1}", f"p{2 * n + 3}")]

    r, resp, j = guards.Var("r"), guards.Var("resp"), guards.Var("J")
    inscriptions = [(("p1", "t1"), (r,)), (("t2", f"p{n + 2}"), (resp,))]
    for i in range(2, n + 2):
        inscriptions.append((("t1", f"p{i}"), (r,)))
        inscriptions.append(((f"p{i}", "t2"), (resp,)))
        inscriptions.append(((f"p{n + 2}", f"t{i + 1}"), (j,)))
    conditions = tuple(
        (f"t{i}", guards.Compare(j, "==", guards.Lit(i - 2)))
        for i in range(3, n + 3))
    actions = (("t2", (guards.Assign("J", guards.Lit(choice + 1)),)),)

    struct = InternalStructure(
        places=tuple(places),
        transitions=tuple(f"t{i}" for i in range(1, 2 * n + 3)),
        arcs=tuple(arcs),
        inscriptions=tuple(inscriptions),
        conditions=conditions,
        actions=actions,
        labels=tuple(labels),
    )
    method = MethodSpec("Select", "choose and run one operand",
                        (("r", "request"),), "p1",
                        frozenset({f"p{2 * n + 3}"}))
    gsp = GspSpec(methods=(method,),
                  attributes=(AttributeSpec("J", "int", initial=0),
                              AttributeSpec("r", "string", initial="")))
    meta = _compose_meta("Select", services)
    return WebService(component_services=_union_cs(services),
                      net=GNetModel(gsp, struct), **meta)


def _block_component_services(block: BlockFragment):
    return frozenset(lab.service for _, lab in block.structure.labels
                     if isinstance(lab, IspRef))


def refine(s: WebService, op_name: str, block: BlockFragment) -> WebService:
    """Replace every place labeled with the operation by the block's net,
    splicing block entries after the feeding transitions and block exits
    before the fed transitions."""
    if not block.is_well_formed():
        raise MalformedBlock(
            "block must be connected with non-empty entry and exit sets")
    struct = s.net.internal
    labels = struct.label_map()
    removed = sorted((pid for pid, lab in labels.items()
                      if isinstance(lab, OpLabel) and lab.name == op_name),
                     key=lambda x: x)
    if not removed:
        return s
    removed_set = set(removed)

    block = rename_block(block, "A")
    bs = block.structure
    entries, exits = block.entries, block.exits

    inscriptions = struct.inscription_map()
    new_arcs = []
    new_inscriptions = {}
    for src, tgt in struct.arcs:
        if src in removed_set or tgt in removed_set:
            continue
        new_arcs.append((src, tgt))
        if (src, tgt) in inscriptions:
            new_inscriptions[(src, tgt)] = inscriptions[(src, tgt)]
    # feeders: transitions with an arc into a removed place
    for src, tgt in struct.arcs:
        if tgt in removed_set:  # (t_i, p_k)
            for entry in entries:
                new_arcs.append((src, entry))
                if (src, tgt) in inscriptions:
                    new_inscriptions.setdefault((src, entry),
                                                inscriptions[(src, tgt)])
        if src in removed_set:  # (p_k, t_j)
            for ex in exits:
                new_arcs.append((ex, tgt))
                if (src, tgt) in inscriptions:
                    new_inscriptions.setdefault((ex, tgt),
                                                inscriptions[(src, tgt)])
    new_arcs.extend(bs.arcs)
    new_inscriptions.update(bs.inscription_map())
    # deduplicate while keeping first-seen order
    new_arcs = list(dict.fromkeys(new_arcs))

    places = tuple(p for p in struct.places if p.id not in removed_set) + \
        bs.places
    new_labels = tuple((pid, lab) for pid, lab in struct.labels
                       if pid not in removed_set) + bs.labels

    methods = []
    for m in s.net.gsp.methods:
        init = m.init_place
        goals = set(m.goal_places)
        if init in removed_set:
            if len(entries) != 1:
                raise MalformedBlock(
                    "refining a method's initial place requires a block "
                    "with a single entry")
            init = entries[0]
        if goals & removed_set:
            goals = (goals - removed_set) | set(exits)
        methods.append(replace(m, init_place=init,
                               goal_places=frozenset(goals)))

    new_struct = InternalStructure(
        places=places,
        transitions=struct.transitions + bs.transitions,
        arcs=tuple(new_arcs),
        inscriptions=tuple(sorted(new_inscriptions.items())),
        conditions=struct.conditions + bs.conditions,
        actions=struct.actions + bs.actions,
        labels=new_labels,
    )
    cs = s.component_services | _block_component_services(block)
    return replace(s, name=f"Ref({s.name},{op_name})",
                   desc=f"{s.name} with {op_name} refined",
                   component_services=cs,
                   net=GNetModel(replace(s.net.gsp, methods=tuple(methods)),
                                 new_struct))


def replace_service(s: WebService, s1: WebService, s2: WebService) -> WebService:
    """Swap every reference to component s1 for s2; identity when s does not
    contain s1's components."""
    if is_empty_service(s2):
        raise EmptyReplacement("replacement service must not be empty")
    if not (s1.component_services <= s.component_services):
        return s

    old_main = main_method_name(s1)
    new_main = main_method_name(s2)

    def map_method(m):
        return new_main if m == old_main else m

    struct = s.net.internal
    new_places = []
    for p in struct.places:
        if p.kind is PlaceKind.ISP and p.invoked_gnet == s1.name:
            new_places.append(replace(p, invoked_gnet=s2.name,
                                      using_method=map_method(p.using_method)))
        else:
            new_places.append(p)
    new_labels = []
    for pid, lab in struct.labels:
        if isinstance(lab, IspRef) and lab.service == s1.name:
            new_labels.append((pid, IspRef(s2.name, map_method(lab.method))))
        else:
            new_labels.append((pid, lab))

    cs = (s.component_services - s1.component_services) | s2.component_services
    new_struct = replace(struct, places=tuple(new_places),
                         labels=tuple(new_labels))
    return replace(s, name=f"Rep({s.name},{s1.name},{s2.name})",
                   desc=f"{s.name} with {s1.name} replaced by {s2.name}",
                   component_services=cs,
                   net=GNetModel(s.net.gsp, new_struct))
