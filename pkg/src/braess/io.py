"""JSON documents for instances, flows and results; DOT export."""

from __future__ import annotations

import hashlib
import json
from fractions import Fraction
from typing import Any, Mapping

from .errors import BraessError, StructureError
from .game import Edge, Flow, LatencyFunction, RoutingInstance, as_fraction, format_fraction

SCHEMA_VERSION = 1
LATENCY_TYPES = {"linear": "linear", "affine": "affine", "general": "general",
                 "general-monotone": "general"}


class ParseError(BraessError, ValueError):
    """Base class for document errors."""


class MalformedRationalError(ParseError):
    pass


class UnknownLatencyTypeError(ParseError):
    pass


class DanglingReferenceError(ParseError):
    pass


class MissingPathError(ParseError):
    pass


class SchemaError(ParseError):
    pass


def _rational(value, where: str) -> Fraction:
    if isinstance(value, (int, str)) and not isinstance(value, bool):
        try:
            return as_fraction(value)
        except ValueError:
            pass
    raise MalformedRationalError(f"malformed rational {value!r} at {where}")


def _field(obj: Mapping, key: str, where: str):
    if not isinstance(obj, Mapping) or key not in obj:
        raise SchemaError(f"missing field {key!r} in {where}")
    return obj[key]


def _latency(doc: Mapping, where: str) -> LatencyFunction:
    kind = _field(doc, "type", where)
    if kind not in LATENCY_TYPES:
        raise UnknownLatencyTypeError(f"unknown latency type {kind!r} at {where}")
    kind = LATENCY_TYPES[kind]
    xi = _rational(doc["xi"], f"{where}.xi") if doc.get("xi") is not None else None
    if kind == "general":
        table = _field(doc, "table", where)
        pts = [(_rational(x, f"{where}.table"), _rational(y, f"{where}.table")) for x, y in table]
        return LatencyFunction.tabulated(pts, xi)
    a = _rational(_field(doc, "a", where), f"{where}.a")
    b = _rational(doc.get("b", "0/1"), f"{where}.b")
    if kind == "linear":
        if b != 0:
            raise SchemaError(f"linear latency with nonzero intercept at {where}")
        return LatencyFunction("linear", a, Fraction(0), xi)
    return LatencyFunction("affine", a, b, xi)


def _load(text: str | Mapping) -> Mapping:
    if isinstance(text, Mapping):
        return text
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from None


def parse_document(text: str | Mapping) -> tuple[RoutingInstance, dict | None]:
    """Parse an instance document into an instance and its (raw) metadata block."""
    doc = _load(text)
    version = doc.get("schema_version", SCHEMA_VERSION) if isinstance(doc, Mapping) else None
    if version != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema_version {version!r}")
    nodes = [str(v) for v in _field(doc, "nodes", "document")]
    source, sink = _field(doc, "source", "document"), _field(doc, "sink", "document")
    rate = _rational(doc.get("rate", "1/1"), "rate")
    known = set(nodes)
    for role, v in (("source", source), ("sink", sink)):
        if v not in known:
            raise DanglingReferenceError(f"{role} {v!r} is not a listed node")
    edges = []
    for i, e in enumerate(_field(doc, "edges", "document")):
        where = f"edges[{i}]"
        eid, tail, head = (_field(e, k, where) for k in ("id", "tail", "head"))
        for end in (tail, head):
            if end not in known:
                raise DanglingReferenceError(f"edge {eid!r} references unknown node {end!r}")
        edges.append(Edge(str(eid), tail, head, _latency(_field(e, "latency", where), f"{where}.latency")))
    try:
        inst = RoutingInstance(tuple(nodes), source, sink, tuple(edges), rate)
    except StructureError as exc:
        if "no s-t path" in str(exc):
            raise MissingPathError("the network has no s-t path") from None
        raise SchemaError(str(exc)) from None
    return inst, doc.get("metadata")


def parse_instance(text: str | Mapping) -> RoutingInstance:
    return parse_document(text)[0]


def jsonable(x: Any) -> Any:
    """Recursively render Fractions as ``p/q`` strings."""
    if isinstance(x, Fraction):
        return format_fraction(x)
    if isinstance(x, Mapping):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        items = sorted(x) if isinstance(x, (set, frozenset)) else x
        return [jsonable(v) for v in items]
    return x


def latency_to_dict(lat: LatencyFunction) -> dict:
    out: dict[str, Any] = {"type": lat.kind}
    if lat.kind == "general":
        out["table"] = [[format_fraction(x), format_fraction(y)] for x, y in lat.table]
    else:
        out["a"] = format_fraction(lat.a)
        out["b"] = format_fraction(lat.b)
    out["xi"] = format_fraction(lat.xi)
    return out


def instance_to_dict(instance: RoutingInstance, metadata: Mapping | None = None) -> dict:
    doc: dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "nodes": list(instance.nodes),
        "source": instance.source,
        "sink": instance.sink,
        "rate": format_fraction(instance.rate),
        "edges": [{"id": e.id, "tail": e.tail, "head": e.head, "latency": latency_to_dict(e.latency)}
                  for e in instance.edges],
    }
    if metadata is not None:
        doc["metadata"] = jsonable(metadata)
    return doc


def emit_instance(instance: RoutingInstance, metadata: Mapping | None = None) -> str:
    return json.dumps(instance_to_dict(instance, metadata), indent=2) + "\n"


def instance_digest(instance: RoutingInstance) -> str:
    canon = json.dumps(instance_to_dict(instance), sort_keys=True, separators=(",", ":"))
    return "sha256:" + hashlib.sha256(canon.encode()).hexdigest()


def flow_to_dict(flow: Flow) -> dict:
    return {"paths": [{"edges": list(p), "value": format_fraction(v)} for p, v in flow.path_flows.items()]}


def parse_flow(text: str | Mapping, instance: RoutingInstance) -> Flow:
    doc = _load(text)
    entries = _field(doc, "paths", "flow document")
    return Flow(instance, {tuple(_field(e, "edges", "flow path")): _rational(_field(e, "value", "flow path"), "flow value")
                           for e in entries})


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(instance: RoutingInstance, flow: Flow | None = None) -> str:
    """DOT digraph; with a flow, edges are labelled ``f_e / c_e(f_e)`` and the Nash cut is bold red."""
    from .equilibrium import is_nash_flow

    lines = ["digraph G {", "  rankdir=LR;"]
    for v in instance.nodes:
        attrs = ' [shape=doublecircle]' if v in (instance.source, instance.sink) else ""
        lines.append(f"  {_quote(v)}{attrs};")
    cut: frozenset[str] = frozenset()
    loads: Mapping[str, Fraction] = {}
    if flow is not None:
        loads = flow.loads
        cert = is_nash_flow(flow)
        cut = cert.blocking_cut or frozenset()
    for e in instance.edges:
        if flow is None:
            label = f"{e.id}: {e.latency}"
        else:
            fe = loads.get(e.id, Fraction(0))
            label = f"{_num(fe)} / {_num(e.latency(fe))}"
        style = ", color=red, penwidth=2" if e.id in cut else ""
        lines.append(f"  {_quote(e.tail)} -> {_quote(e.head)} [label={_quote(label)}, id={_quote(e.id)}{style}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _num(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
