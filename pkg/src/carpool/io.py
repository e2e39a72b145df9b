"""Instance and result documents (UTF-8 JSON, exact rationals)."""
from __future__ import annotations

import json
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from typing import Any

from .auction import TripVector
from .equilibrium import EquilibriumReport, Outcome
from .network import Edge, Network, NetworkError, Route
from .preferences import InstanceError, MarketInstance, RiderPreferences


class SchemaError(ValueError):
    """A document does not match the expected shape; ``path`` locates the field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


# --------------------------------------------------------------------------
# Rationals


def parse_rational(value: Any, path: str = "") -> Fraction:
    """Exact rational from an int, a decimal or fraction string, or a JSON number string."""
    if isinstance(value, bool):
        raise SchemaError(path, "expected a number, got a boolean")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(Decimal(repr(value)))
    if isinstance(value, str):
        text = value.strip()
        try:
            if "/" in text:
                num, den = text.split("/")
                return Fraction(int(num), int(den))
            return Fraction(Decimal(text))
        except (ValueError, ZeroDivisionError, InvalidOperation):
            raise SchemaError(path, f"not a rational number: {value!r}") from None
    raise SchemaError(path, f"expected a number, got {type(value).__name__}")


def format_rational(value: Fraction, as_float: bool = False):
    value = Fraction(value)
    if as_float:
        return float(value)
    return f"{value.numerator}/{value.denominator}"


def loads(text: str, what: str = "document") -> Any:
    """json.loads keeping decimal literals exact."""
    try:
        return json.loads(text, parse_float=str)
    except json.JSONDecodeError as exc:
        raise SchemaError("", f"{what} is not valid JSON (line {exc.lineno}, column {exc.colno}): {exc.msg}") from None


# --------------------------------------------------------------------------
# Instances


def _require(doc: dict, key: str, path: str) -> Any:
    if not isinstance(doc, dict):
        raise SchemaError(path, "expected an object")
    if key not in doc:
        raise SchemaError(f"{path}.{key}" if path else key, "missing field")
    return doc[key]


def _integer(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(path, "expected an integer")
    return value


def _ident(value: Any, path: str) -> str:
    if isinstance(value, bool) or not isinstance(value, (str, int)):
        raise SchemaError(path, "expected a string identifier")
    return str(value)


def _rational_list(value: Any, path: str) -> tuple[Fraction, ...]:
    if not isinstance(value, list):
        raise SchemaError(path, "expected an array")
    return tuple(parse_rational(v, f"{path}[{i}]") for i, v in enumerate(value))


def instance_from_dict(doc: dict, max_routes: int | None = None) -> MarketInstance:
    if not isinstance(doc, dict):
        raise SchemaError("", "instance must be a JSON object")
    nodes = _require(doc, "nodes", "")
    if not isinstance(nodes, list):
        raise SchemaError("nodes", "expected an array")
    nodes = [_ident(n, f"nodes[{i}]") for i, n in enumerate(nodes)]
    origin = _ident(_require(doc, "origin", ""), "origin")
    destination = _ident(_require(doc, "destination", ""), "destination")
    raw_edges = _require(doc, "edges", "")
    if not isinstance(raw_edges, list):
        raise SchemaError("edges", "expected an array")
    edges = []
    for i, e in enumerate(raw_edges):
        p = f"edges[{i}]"
        try:
            edges.append(
                Edge(
                    _ident(_require(e, "id", p), f"{p}.id"),
                    _ident(_require(e, "from", p), f"{p}.from"),
                    _ident(_require(e, "to", p), f"{p}.to"),
                    _integer(_require(e, "capacity", p), f"{p}.capacity"),
                    parse_rational(_require(e, "travel_time", p), f"{p}.travel_time"),
                )
            )
        except NetworkError as exc:
            raise SchemaError(p, str(exc)) from None
    try:
        network = Network(nodes, origin, destination, edges, max_routes=max_routes)
    except NetworkError as exc:
        raise SchemaError("edges", str(exc)) from None

    A = _integer(_require(doc, "car_capacity", ""), "car_capacity")
    delta = parse_rational(_require(doc, "delta", ""), "delta")
    shared = doc.get("gamma")
    shared = None if shared is None else _rational_list(shared, "gamma")
    raw_riders = _require(doc, "riders", "")
    if not isinstance(raw_riders, list):
        raise SchemaError("riders", "expected an array")
    per_rider = [isinstance(r, dict) and r.get("gamma") is not None for r in raw_riders]
    if shared is not None and any(per_rider):
        raise SchemaError("gamma", "give either a shared gamma or per-rider gammas, not both")
    if shared is None and raw_riders and not all(per_rider):
        missing = per_rider.index(False)
        raise SchemaError(f"riders[{missing}].gamma", "missing (no shared gamma given)")
    if shared is None and not raw_riders:
        shared = tuple(Fraction(0) for _ in range(max(A, 1)))
    riders = []
    for i, r in enumerate(raw_riders):
        p = f"riders[{i}]"
        gamma = shared if shared is not None else _rational_list(r["gamma"], f"{p}.gamma")
        try:
            riders.append(
                RiderPreferences(
                    _ident(_require(r, "id", p), f"{p}.id"),
                    parse_rational(_require(r, "alpha", p), f"{p}.alpha"),
                    parse_rational(_require(r, "beta", p), f"{p}.beta"),
                    gamma,
                )
            )
        except InstanceError as exc:
            raise SchemaError(p, str(exc)) from None
    try:
        return MarketInstance(network, riders, delta, A)
    except InstanceError as exc:
        raise SchemaError("", str(exc)) from None


def load_instance(path: str, max_routes: int | None = None) -> MarketInstance:
    with open(path, encoding="utf-8") as fh:
        return instance_from_dict(loads(fh.read(), path), max_routes=max_routes)


def instance_to_dict(instance: MarketInstance) -> dict:
    net = instance.network
    doc: dict = {
        "nodes": list(net.nodes),
        "origin": net.origin,
        "destination": net.destination,
        "edges": [
            {
                "id": e.id,
                "from": e.tail,
                "to": e.head,
                "capacity": e.capacity,
                "travel_time": format_rational(e.travel_time),
            }
            for e in net.edges
        ],
    }
    if instance.homogeneous_gamma:
        doc["gamma"] = [format_rational(g) for g in instance.gamma]
        doc["riders"] = [
            {"id": r.id, "alpha": format_rational(r.alpha), "beta": format_rational(r.beta)}
            for r in instance.riders
        ]
    else:
        doc["riders"] = [
            {
                "id": r.id,
                "alpha": format_rational(r.alpha),
                "beta": format_rational(r.beta),
                "gamma": [format_rational(g) for g in r.gamma],
            }
            for r in instance.riders
        ]
    doc["delta"] = format_rational(instance.delta)
    doc["car_capacity"] = instance.car_capacity
    return doc


def dump_json(doc: Any) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


# --------------------------------------------------------------------------
# Outcomes and results


def trips_to_list(x: TripVector, instance: MarketInstance, as_float: bool = False) -> list[dict]:
    from .preferences import social_trip_value

    return [
        {
            "riders": list(group),
            "route": list(route.edges),
            "value": format_rational(social_trip_value(instance, group, route), as_float),
        }
        for group, route in x.sorted_trips(instance)
    ]


def rational_map(values: dict, order, as_float: bool = False) -> dict:
    return {str(k): format_rational(values[k], as_float) for k in order}


def outcome_to_dict(outcome: Outcome, instance: MarketInstance, as_float: bool = False) -> dict:
    riders = instance.rider_ids
    edges = [e.id for e in instance.network.edges]
    return {
        "trips": trips_to_list(outcome.x, instance, as_float),
        "payments": rational_map(outcome.payments, riders, as_float),
        "tolls": rational_map(outcome.tolls, edges, as_float),
        "utilities": rational_map(outcome.utilities(instance), riders, as_float),
    }


def report_to_dict(report: EquilibriumReport) -> dict:
    return {"flags": dict(report.flags), "equilibrium": report.ok, "witnesses": list(report.witnesses)}


def outcome_from_dict(doc: dict, instance: MarketInstance) -> Outcome:
    """Parse the trips/payments/tolls of a result document against ``instance``."""
    if not isinstance(doc, dict):
        raise SchemaError("", "outcome must be a JSON object")
    trips_doc = _require(doc, "trips", "")
    if not isinstance(trips_doc, list):
        raise SchemaError("trips", "expected an array")
    trips: list[tuple[frozenset, Route]] = []
    for i, t in enumerate(trips_doc):
        p = f"trips[{i}]"
        members = _require(t, "riders", p)
        if not isinstance(members, list) or not members:
            raise SchemaError(f"{p}.riders", "expected a non-empty array")
        members = [_ident(m, f"{p}.riders[{j}]") for j, m in enumerate(members)]
        for m in members:
            if m not in instance.by_id:
                raise SchemaError(f"{p}.riders", f"unknown rider {m!r}")
        route_doc = _require(t, "route", p)
        if not isinstance(route_doc, list):
            raise SchemaError(f"{p}.route", "expected an array of edge ids")
        try:
            route = instance.network.make_route([_ident(e, f"{p}.route") for e in route_doc])
        except NetworkError as exc:
            raise SchemaError(f"{p}.route", str(exc)) from None
        trips.append((frozenset(members), route))

    def read_map(key: str, known) -> dict:
        raw = doc.get(key, {})
        if not isinstance(raw, dict):
            raise SchemaError(key, "expected an object")
        out = {}
        for k, v in raw.items():
            if k not in known:
                raise SchemaError(f"{key}.{k}", "unknown id")
            out[k] = parse_rational(v, f"{key}.{k}")
        return out

    payments = read_map("payments", instance.by_id)
    tolls = read_map("tolls", instance.network.edge_by_id)
    for m in instance.rider_ids:
        payments.setdefault(m, Fraction(0))
    for e in instance.network.edges:
        tolls.setdefault(e.id, Fraction(0))
    return Outcome(TripVector(trips), payments, tolls)
