"""PROD text export of flat nets, a minimal reader for round-trip tests,
and dot export of service nets for figure rendering.

Layout of the PROD dialect written here::

    #place P1f mk(<.1, true.>)
    #trans T1
    in { P1l: <.seq, Available.>; }
    out { P2f: <.seq, Available.>; }
    gate Available == true;
    #endtr

Copy transitions are interleaved with the source transitions: each T_p is
emitted just before the first transition consuming from p·l, or just after
the first transition producing into p·f when the copied token is never
consumed.
"""

from __future__ import annotations

from . import guards
from .analysis import FlatNet, FlatPlace, FlatTransition
from .errors import ParseError
from .model import IspRef, OpLabel, PlaceKind, WebService, natural_key


def _value_text(v):
    if v is True:
        return "true"
    if v is False:
        return "false"
    if isinstance(v, str):
        return '"%s"' % v
    return str(v)


def _tuple_text(fields):
    return "<." + ", ".join(fields) + ".>"


def _transition_order(flat: FlatNet):
    copies = {}
    sources = []
    for t in flat.transitions:
        if t.origin is None:
            # copy transitions have a single input, the f side of their place
            copies[t.inputs[0][0][:-1]] = t
        else:
            sources.append(t)
    sources.sort(key=lambda t: natural_key(t.name))
    consumed = set()
    for t in sources:
        for pname, _ in t.inputs:
            if pname.endswith("l"):
                consumed.add(pname[:-1])
    emitted = set()
    order = []

    def emit_copy(pid):
        if pid in copies and pid not in emitted:
            emitted.add(pid)
            order.append(copies[pid])

    for t in sources:
        for pname, _ in t.inputs:
            if pname.endswith("l"):
                emit_copy(pname[:-1])
        order.append(t)
        for pname, _ in t.outputs:
            pid = pname[:-1]
            if pname.endswith("f") and pid not in consumed:
                emit_copy(pid)
    for pid in sorted(copies, key=natural_key):
        emit_copy(pid)
    return order


def export_prod(flat: FlatNet) -> str:
    lines = []
    for pname in sorted(flat.places, key=natural_key):
        tokens = flat.initial.get(pname, [])
        if tokens:
            marks = "+".join(_tuple_text([_value_text(v) for v in tok])
                             for tok in tokens)
            lines.append(f"#place {pname} mk({marks})")
        else:
            lines.append(f"#place {pname}")
    for t in _transition_order(flat):
        lines.append(f"#trans {t.name}")
        ins = "; ".join(f"{p}: {_tuple_text(pattern)}"
                        for p, pattern in t.inputs)
        lines.append("in { %s; }" % ins)
        outs = "; ".join(
            f"{p}: {_tuple_text([guards.print_expr(e) for e in exprs])}"
            for p, exprs in t.outputs)
        lines.append("out { %s; }" % outs)
        if t.gate == guards.TRUE:
            lines.append("gate ;")
        else:
            lines.append(f"gate {guards.print_condition(t.gate)};")
        lines.append("#endtr")
    return "\n".join(lines) + "\n"


# --- Minimal reader (round-trip testing only) ------------------------------


def _parse_tuple(text, pos):
    start = text.index("<.", pos)
    end = text.index(".>", start)
    inner = text[start + 2:end].strip()
    return inner, end + 2


def _parse_flow(line, expect_keyword):
    body = line.strip()
    if not body.startswith(expect_keyword):
        raise ParseError(0, f"expected {expect_keyword!r} in {line!r}")
    body = body[len(expect_keyword):].strip()
    if not (body.startswith("{") and body.endswith("}")):
        raise ParseError(0, f"malformed flow clause: {line!r}")
    body = body[1:-1].strip()
    entries = []
    for chunk in body.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        pname, _, tup = chunk.partition(":")
        inner, _ = _parse_tuple(tup, 0)
        entries.append((pname.strip(), guards.parse_inscription(inner)))
    return entries


def reparse_prod(text: str) -> FlatNet:
    """Reconstruct a FlatNet from our own export dialect.  Place signatures
    are recovered from the first arc tuple seen at each place; domain
    declarations are not part of the format."""
    places = {}
    signatures = {}
    initial = {}
    transitions = []
    lines = [ln for ln in text.splitlines() if ln.strip()]
    i = 0
    while i < len(lines):
        line = lines[i].strip()
        if line.startswith("#place"):
            rest = line[len("#place"):].strip()
            name, _, mk = rest.partition(" ")
            places[name] = None
            mk = mk.strip()
            if mk:
                if not (mk.startswith("mk(") and mk.endswith(")")):
                    raise ParseError(0, f"malformed marking: {line!r}")
                tokens = []
                pos = 3
                while pos < len(mk) - 1:
                    inner, pos = _parse_tuple(mk, pos)
                    exprs = guards.parse_inscription(inner)
                    tokens.append(tuple(guards.eval_expr(e, {})
                                        for e in exprs))
                    if mk[pos:pos + 1] == "+":
                        pos += 1
                initial[name] = tokens
            i += 1
        elif line.startswith("#trans"):
            name = line[len("#trans"):].strip()
            ins = _parse_flow(lines[i + 1], "in")
            outs = _parse_flow(lines[i + 2], "out")
            gate_line = lines[i + 3].strip()
            if not gate_line.startswith("gate"):
                raise ParseError(0, f"expected a gate line: {gate_line!r}")
            gate_text = gate_line[len("gate"):].strip().rstrip(";").strip()
            gate = guards.parse_condition(gate_text)
            if lines[i + 4].strip() != "#endtr":
                raise ParseError(0, "expected #endtr")
            inputs = []
            for pname, exprs in ins:
                pattern = tuple(e.name for e in exprs)
                inputs.append((pname, pattern))
                signatures.setdefault(pname, pattern)
            for pname, exprs in outs:
                signatures.setdefault(
                    pname,
                    tuple(e.name for e in exprs
                          if isinstance(e, guards.Var)))
            origin = None if name.startswith("T_") else name
            transitions.append(FlatTransition(
                name=name, inputs=tuple(inputs),
                outputs=tuple((p, tuple(e)) for p, e in outs),
                gate=gate, origin=origin))
            i += 5
        else:
            raise ParseError(0, f"unexpected line: {line!r}")
    flat_places = {name: FlatPlace(name, signatures.get(name, ()))
                   for name in places}
    return FlatNet(places=flat_places, transitions=transitions,
                   initial=initial, domains={})


# --- Dot export ------------------------------------------------------------

_SHAPES = {
    PlaceKind.NORMAL: "circle",
    PlaceKind.GOAL: "doublecircle",
    PlaceKind.ISP: "ellipse",
}


def _dot_escape(text):
    return text.replace("\\", "\\\\").replace('"', '\\"')


def export_dot(ws: WebService) -> str:
    struct = ws.net.internal
    labels = struct.label_map()
    lines = [f'digraph "{_dot_escape(ws.name)}" {{', "  rankdir=LR;"]
    for p in struct.places:
        lab = labels.get(p.id)
        if isinstance(lab, OpLabel):
            text = f"{p.id}\\n{lab.name}"
        elif isinstance(lab, IspRef):
            text = f"{p.id}\\nISP({lab.service}.{lab.method})"
        else:
            text = p.id
        lines.append(f'  "{_dot_escape(p.id)}" '
                     f'[shape={_SHAPES[p.kind]}, label="{_dot_escape(text)}"];')
    for t in struct.transitions:
        lines.append(f'  "{_dot_escape(t)}" '
                     f'[shape=box, label="{_dot_escape(t)}"];')
    for a, b in struct.arcs:
        lines.append(f'  "{_dot_escape(a)}" -> "{_dot_escape(b)}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
