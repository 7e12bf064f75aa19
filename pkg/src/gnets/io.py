"""JSON (de)serialization of services, block fragments and traces, plus
registry loading from a directory of definition files.

A registry directory holds one ``*.json`` document per service and one
``*.block.json`` document per block fragment.  Guard texts use the
inscription mini-language; see guards.py.
"""

from __future__ import annotations

import json
from pathlib import Path

from . import guards
from .errors import ParseError
from .model import (GOAL, TAU, AttributeSpec, BlockFragment, GNetModel,
                    GoalLabel, GspSpec, InternalStructure, IspRef, MethodSpec,
                    OpLabel, Place, PlaceKind, Registry, TauLabel, WebService)

_KINDS = {k.value: k for k in PlaceKind}


# --- Structure <-> dict ----------------------------------------------------


def _label_to_dict(label):
    if isinstance(label, OpLabel):
        return {"variant": "op", "name": label.name}
    if isinstance(label, TauLabel):
        return {"variant": "tau"}
    if isinstance(label, GoalLabel):
        return {"variant": "goal"}
    if isinstance(label, IspRef):
        return {"variant": "isp", "service": label.service,
                "method": label.method}
    raise TypeError(f"not a label: {label!r}")


def _label_from_dict(d):
    variant = d.get("variant")
    if variant == "op":
        return OpLabel(d["name"])
    if variant == "tau":
        return TAU
    if variant == "goal":
        return GOAL
    if variant == "isp":
        return IspRef(d["service"], d["method"])
    raise ParseError(0, f"unknown label variant {variant!r}")


def _structure_to_dict(struct: InternalStructure) -> dict:
    return {
        "places": [
            {"id": p.id, "kind": p.kind.value,
             **({"invokedGnet": p.invoked_gnet,
                 "usingMethod": p.using_method}
                if p.kind is PlaceKind.ISP else {})}
            for p in struct.places],
        "transitions": list(struct.transitions),
        "arcs": [[a, b] for a, b in struct.arcs],
        "inscriptions": [
            {"src": a, "tgt": b, "fields": guards.print_inscription(ins)}
            for (a, b), ins in struct.inscriptions],
        "conditions": [
            {"transition": t, "text": guards.print_condition(c)}
            for t, c in struct.conditions],
        "actions": [
            {"transition": t, "text": guards.print_action(a)}
            for t, a in struct.actions],
        "labels": [
            {"place": p, **_label_to_dict(lab)}
            for p, lab in struct.labels],
    }


def _structure_from_dict(d: dict) -> InternalStructure:
    places = []
    for pd in d.get("places", ()):
        kind = _KINDS.get(pd.get("kind", "normal"))
        if kind is None:
            raise ParseError(0, f"unknown place kind {pd.get('kind')!r}")
        places.append(Place(pd["id"], kind,
                            invoked_gnet=pd.get("invokedGnet"),
                            using_method=pd.get("usingMethod")))
    return InternalStructure(
        places=tuple(places),
        transitions=tuple(d.get("transitions", ())),
        arcs=tuple((a, b) for a, b in d.get("arcs", ())),
        inscriptions=tuple(
            ((i["src"], i["tgt"]), guards.parse_inscription(i["fields"]))
            for i in d.get("inscriptions", ())),
        conditions=tuple(
            (c["transition"], guards.parse_condition(c["text"]))
            for c in d.get("conditions", ())),
        actions=tuple(
            (a["transition"], guards.parse_action(a["text"]))
            for a in d.get("actions", ())),
        labels=tuple(
            (ld["place"], _label_from_dict(ld))
            for ld in d.get("labels", ())),
    )


# --- Service <-> dict ------------------------------------------------------


def service_to_dict(ws: WebService) -> dict:
    return {
        "name": ws.name,
        "desc": ws.desc,
        "loc": ws.loc,
        "url": ws.url,
        "componentServices": sorted(ws.component_services),
        "net": {
            "gsp": {
                "methods": [
                    {"name": m.name,
                     "description": m.description,
                     "params": [{"name": n, "description": desc}
                                for n, desc in m.params],
                     "initPlace": m.init_place,
                     "goalPlaces": sorted(m.goal_places)}
                    for m in ws.net.gsp.methods],
                "attributes": [
                    {"name": a.name, "valueType": a.value_type,
                     "initial": a.initial,
                     "domain": list(a.domain) if a.domain is not None
                     else None}
                    for a in ws.net.gsp.attributes],
            },
            "is": _structure_to_dict(ws.net.internal),
        },
    }


def service_from_dict(d: dict) -> WebService:
    try:
        gsp_d = d["net"]["gsp"]
        methods = tuple(
            MethodSpec(m["name"], m.get("description", ""),
                       tuple((p["name"], p.get("description", ""))
                             for p in m.get("params", ())),
                       m["initPlace"], frozenset(m["goalPlaces"]))
            for m in gsp_d.get("methods", ()))
        attributes = tuple(
            AttributeSpec(a["name"], a["valueType"], a.get("initial"),
                          tuple(a["domain"]) if a.get("domain") is not None
                          else None)
            for a in gsp_d.get("attributes", ()))
        return WebService(
            name=d["name"],
            desc=d.get("desc", ""),
            loc=d.get("loc"),
            url=d.get("url"),
            component_services=frozenset(d.get("componentServices",
                                               [d["name"]])),
            net=GNetModel(GspSpec(methods, attributes),
                          _structure_from_dict(d["net"]["is"])),
        )
    except KeyError as exc:
        raise ParseError(0, f"missing field {exc.args[0]!r}") from None


def block_to_dict(name: str, block: BlockFragment) -> dict:
    return {
        "name": name,
        "entry": block.entries,
        "exit": block.exits,
        "is": _structure_to_dict(block.structure),
    }


def block_from_dict(d: dict) -> tuple:
    try:
        block = BlockFragment(_structure_from_dict(d["is"]))
        declared_entry = sorted(d.get("entry", ()))
        declared_exit = sorted(d.get("exit", ()))
        if declared_entry and declared_entry != block.entries:
            raise ParseError(0, f"declared entry {declared_entry} does not "
                             f"match computed {block.entries}")
        if declared_exit and declared_exit != block.exits:
            raise ParseError(0, f"declared exit {declared_exit} does not "
                             f"match computed {block.exits}")
        return d["name"], block
    except KeyError as exc:
        raise ParseError(0, f"missing field {exc.args[0]!r}") from None


# --- Files -----------------------------------------------------------------


def save_service(ws: WebService, path) -> None:
    Path(path).write_text(json.dumps(service_to_dict(ws), indent=2,
                                     ensure_ascii=False) + "\n")


def load_service(path) -> WebService:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(exc.pos, str(exc)) from None
    return service_from_dict(data)


def save_block(name: str, block: BlockFragment, path) -> None:
    Path(path).write_text(json.dumps(block_to_dict(name, block), indent=2,
                                     ensure_ascii=False) + "\n")


def load_block(path) -> tuple:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(exc.pos, str(exc)) from None
    return block_from_dict(data)


def load_registry(directory) -> Registry:
    reg = Registry()
    root = Path(directory)
    if not root.is_dir():
        raise FileNotFoundError(f"registry directory not found: {root}")
    for path in sorted(root.glob("*.json")):
        if path.name.endswith(".block.json"):
            name, block = load_block(path)
            reg.insert_block(name, block)
        else:
            reg.insert(load_service(path))
    return reg


# --- Traces ----------------------------------------------------------------


def trace_to_dict(outcome: str, events) -> dict:
    return {
        "outcome": outcome,
        "steps": [
            {"depth": e.depth,
             "transition": e.transition,
             "binding": dict(e.binding),
             "consumed": [[p, dict(fields)] for p, fields in e.consumed],
             "produced": [[p, dict(fields)] for p, fields in e.produced]}
            for e in events],
    }
