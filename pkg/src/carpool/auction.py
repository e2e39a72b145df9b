"""Auxiliary unit-capacity routes, the ascending auction, and trip conversion."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Iterable, Mapping

from . import kernels
from .network import Route, RouteCapacityVector
from .preferences import (
    HeterogeneousGammaError,
    MarketInstance,
    augmented_value,
    social_trip_value,
)


@dataclass(frozen=True)
class AuxiliaryRoute:
    parent: Route
    copy: int

    @property
    def travel_time(self) -> Fraction:
        return self.parent.travel_time

    @property
    def name(self) -> str:
        return f"{self.parent.name}#{self.copy}"


def build_auxiliary(capacities: RouteCapacityVector) -> tuple[AuxiliaryRoute, ...]:
    """One unit-capacity copy per unit of route capacity, in route-key order."""
    return tuple(AuxiliaryRoute(r, i) for r, k in capacities.items() for i in range(k))


class TripVector:
    """Selected trips as a multiset of (group, route) pairs."""

    def __init__(self, trips: Iterable[tuple[Iterable, Route]] = ()):
        counts: dict[tuple[frozenset, Route], int] = {}
        for group, route in trips:
            key = (frozenset(group), route)
            counts[key] = counts.get(key, 0) + 1
        self._counts = counts

    def __getitem__(self, key: tuple[frozenset, Route]) -> int:
        group, route = key
        return self._counts.get((frozenset(group), route), 0)

    def __len__(self) -> int:
        return sum(self._counts.values())

    def __eq__(self, other) -> bool:
        return isinstance(other, TripVector) and self._counts == other._counts

    def __repr__(self) -> str:
        inner = ", ".join(f"{sorted(map(str, g))}@{r.name}" for g, r in self.trips())
        return f"TripVector([{inner}])"

    def trips(self) -> list[tuple[frozenset, Route]]:
        out = []
        for (g, r), c in self._counts.items():
            out.extend([(g, r)] * c)
        return out

    def sorted_trips(self, instance: MarketInstance) -> list[tuple[tuple, Route]]:
        return sorted(
            ((instance.sorted_group(g), r) for g, r in self.trips()),
            key=lambda gr: (gr[1].key, [instance.index[m] for m in gr[0]]),
        )

    def edge_loads(self) -> dict[str, int]:
        loads: dict[str, int] = {}
        for (_, r), c in self._counts.items():
            for eid in r.edges:
                loads[eid] = loads.get(eid, 0) + c
        return loads

    def assignment(self) -> dict:
        """rider -> (group, route); raises if a rider appears twice."""
        out = {}
        for g, r in self.trips():
            for m in g:
                if m in out:
                    raise ValueError(f"rider {m!r} appears in two trips")
                out[m] = (g, r)
        return out

    def welfare(self, instance: MarketInstance) -> Fraction:
        return sum((social_trip_value(instance, g, r) for g, r in self.trips()), Fraction(0))

    def feasibility_violations(self, instance: MarketInstance) -> list[str]:
        problems = []
        seen: set = set()
        for g, r in self.trips():
            if not 1 <= len(g) <= instance.car_capacity:
                problems.append(f"group {sorted(map(str, g))} has size outside 1..{instance.car_capacity}")
            for m in g:
                if m not in instance.by_id:
                    problems.append(f"unknown rider {m!r}")
                if m in seen:
                    problems.append(f"rider {m!r} takes more than one trip")
                seen.add(m)
        for eid, load in self.edge_loads().items():
            cap = instance.network.edge_by_id[eid].capacity
            if load > cap:
                problems.append(f"edge {eid} load {load} exceeds capacity {cap}")
        return problems

    def is_feasible(self, instance: MarketInstance) -> bool:
        return not self.feasibility_violations(instance)


def social_welfare(x: TripVector, instance: MarketInstance) -> Fraction:
    return x.welfare(instance)


@dataclass
class AuctionState:
    utilities: dict
    assignment: dict[AuxiliaryRoute, frozenset]
    epsilon: Fraction
    iterations: int = 0


@dataclass
class AuctionResult:
    """Final auction state plus the integer scaling used to run it.

    ``scale`` maps values to the kernel's integer units, ``epsilon_units``
    is the increment in those units, and ``v_max_units`` is the largest
    augmented value of the whole rider set on any auxiliary route.
    """

    auxiliary: tuple[AuxiliaryRoute, ...]
    state: AuctionState
    scale: int
    epsilon_units: int
    v_max_units: int
    backend: str
    extra: dict = field(default_factory=dict)

    @property
    def assignment(self) -> dict[AuxiliaryRoute, frozenset]:
        return self.state.assignment

    @property
    def iterations(self) -> int:
        return self.state.iterations

    @property
    def iteration_bound(self) -> Fraction:
        """|M| * V_max / eps, in consistent units."""
        n = len(self.state.utilities)
        return Fraction(n * self.v_max_units, self.epsilon_units)

    def welfare(self, instance: MarketInstance) -> Fraction:
        return sum(
            (augmented_value(instance, b, l.parent)[0] for l, b in self.assignment.items()),
            Fraction(0),
        )


class AuctionGuardExceeded(RuntimeError):
    pass


def _require_homogeneous(instance: MarketInstance, what: str) -> None:
    if not instance.homogeneous_gamma:
        raise HeterogeneousGammaError(what)


def integer_scale(instance: MarketInstance, routes: Iterable[Route]) -> int:
    """Least common denominator of every eta and theta*t term on ``routes``."""
    dens = [1]
    for r in routes:
        for m in instance.rider_ids:
            dens.append(instance.eta(m, r).denominator)
        for th in instance.theta:
            dens.append((th * r.travel_time).denominator)
    return lcm(*dens)


def default_epsilon(instance: MarketInstance) -> Fraction:
    """1 / (2|M| + 1), in integer value units."""
    return Fraction(1, 2 * len(instance.riders) + 1)


def demand_set(
    aux: AuxiliaryRoute,
    state: AuctionState,
    instance: MarketInstance,
) -> frozenset:
    """Riders outside ``aux``'s holding that it demands at current utilities.

    Maximises ``W(J + held) - sum_{held} u - sum_J (u + eps)`` over outside
    sets J.  Because the augmented value is a top-k sum under homogeneous
    disutility, this is a single sort: held riders weigh their eta,
    outsiders eta - u - eps, ties keep held riders then lower ids.  The
    empty set is returned unless some J strictly improves on holding.
    """
    _require_homogeneous(instance, "the demand oracle")
    route = aux.parent
    held = state.assignment.get(aux, frozenset())
    t = route.travel_time
    theta = instance.theta
    items = []
    for m in instance.rider_ids:
        eta = instance.eta(m, route)
        if m in held:
            items.append((-eta, 0, instance.index[m], m))
        else:
            items.append((-(eta - state.utilities[m] - state.epsilon), 1, instance.index[m], m))
    items.sort()
    cap = instance.car_capacity

    def best_prefix(entries) -> tuple[Fraction, int]:
        best, best_k, prefix = Fraction(0), 0, Fraction(0)
        for k, entry in enumerate(entries[:cap], start=1):
            prefix -= entry[0]
            val = prefix - theta[k] * t
            if val > best:
                best, best_k = val, k
        return best, best_k

    best, best_k = best_prefix(items)
    held_best, _ = best_prefix([it for it in items if it[1] == 0])
    if best_k == 0 or best <= held_best:
        return frozenset()
    return frozenset(m for _, outsider, _, m in items[:best_k] if outsider)


def greedy_demand_set(
    aux: AuxiliaryRoute,
    state: AuctionState,
    instance: MarketInstance,
) -> frozenset:
    """Two-phase greedy demand: size of the held representative group, then
    outsiders added by decreasing eta - u while each passes the marginal
    size threshold.

    It never lets an outsider displace a held rider, so it can return the
    empty set while a displacing set has strictly higher surplus; the
    auction therefore uses :func:`demand_set`.
    """
    _require_homogeneous(instance, "the demand oracle")
    route = aux.parent
    t = route.travel_time
    theta = instance.theta
    cap = instance.car_capacity
    held = state.assignment.get(aux, frozenset())

    def threshold(size: int) -> Fraction | None:
        if size + 1 > cap:
            return None
        return (theta[size + 1] - theta[size]) * t

    size = 0
    for m in sorted(held, key=lambda m: (-instance.eta(m, route), instance.index[m])):
        limit = threshold(size)
        if limit is None or instance.eta(m, route) < limit:
            break
        size += 1
    chosen = []
    outsiders = sorted(
        (m for m in instance.rider_ids if m not in held),
        key=lambda m: (-(instance.eta(m, route) - state.utilities[m]), instance.index[m]),
    )
    for m in outsiders:
        limit = threshold(size)
        if limit is None or instance.eta(m, route) - state.utilities[m] < limit:
            break
        size += 1
        chosen.append(m)
    return frozenset(chosen)


def _scaled_inputs(instance: MarketInstance, aux: tuple[AuxiliaryRoute, ...], scale: int):
    eta = []
    theta = []
    for l in aux:
        r = l.parent
        eta.append([int(instance.eta(m, r) * scale) for m in instance.rider_ids])
        theta.append([int(th * r.travel_time * scale) for th in instance.theta])
    return eta, theta


def kelso_crawford(
    instance: MarketInstance,
    auxiliary: tuple[AuxiliaryRoute, ...],
    epsilon: Fraction | None = None,
    backend: str | None = None,
) -> AuctionResult:
    """Ascending auction where auxiliary routes bid for riders.

    Values are scaled to integers first.  ``epsilon`` is measured in those
    integer units and must be below 1/(2|M|); the default is 1/(2|M|+1).
    Each round the lowest-index route with a non-empty demand takes those
    riders (they leave every other route) and their utilities rise by
    epsilon.
    """
    _require_homogeneous(instance, "the auction")
    n = len(instance.riders)
    eps = default_epsilon(instance) if epsilon is None else Fraction(epsilon)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    if n and eps >= Fraction(1, 2 * n):
        raise ValueError(f"epsilon must be below 1/(2|M|) = 1/{2 * n}")
    base = integer_scale(instance, {l.parent for l in auxiliary})
    # eps = p/q integer units: multiply values by q, step by p
    scale = base * eps.denominator
    eps_units = eps.numerator
    eta, theta = _scaled_inputs(instance, auxiliary, scale)
    riders = instance.rider_ids
    v_max = max(
        (augmented_value(instance, riders, l.parent)[0] for l in auxiliary),
        default=Fraction(0),
    )
    v_max_units = int(v_max * scale)
    guard = max(1, 2 * n * max(v_max_units, 0) // eps_units + 1)
    chosen = backend or kernels.BACKEND
    if auxiliary and n:
        owner, util, iterations = kernels.run_auction(eta, theta, eps_units, guard, backend=chosen)
    else:
        owner, util, iterations = [-1] * n, [0] * n, 0
    if iterations < 0:
        raise AuctionGuardExceeded(f"auction exceeded {guard} iterations")
    assignment = {l: frozenset() for l in auxiliary}
    for i, l_idx in enumerate(owner):
        if l_idx >= 0:
            l = auxiliary[l_idx]
            assignment[l] = assignment[l] | {riders[i]}
    utilities = {m: Fraction(u, scale) for m, u in zip(riders, util)}
    state = AuctionState(utilities, assignment, eps / base, iterations)
    return AuctionResult(auxiliary, state, scale, eps_units, v_max_units, chosen)


def chi(assignment: Mapping[AuxiliaryRoute, Iterable], instance: MarketInstance) -> TripVector:
    """Convert augmented holdings to trips via representative groups.

    Riders outside the representative group are dropped.
    """
    seen: set = set()
    trips = []
    for l, held in assignment.items():
        held = frozenset(held)
        if seen & held:
            raise ValueError("a rider is held by two auxiliary routes")
        seen |= held
        if not held:
            continue
        _, rep = augmented_value(instance, held, l.parent)
        if rep.chosen:
            trips.append((rep.chosen, l.parent))
    return TripVector(trips)
