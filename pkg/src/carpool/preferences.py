"""Rider preferences and trip value functions."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Hashable, Iterable, Sequence

from .network import Network, Route

RiderId = Hashable
Group = frozenset

MONOTONICITY_GUARD = 12
GROSS_SUBSTITUTES_GUARD = 8


class InstanceError(ValueError):
    """Raised for malformed market instances."""


class HeterogeneousGammaError(InstanceError):
    def __init__(self, what: str):
        super().__init__(f"{what} requires homogeneous carpool disutility")


class EnumerationGuard(ValueError):
    def __init__(self, what: str, size: int, limit: int):
        super().__init__(f"{what}: {size} exceeds the enumeration guard of {limit}")
        self.size = size
        self.limit = limit


@dataclass(frozen=True)
class RiderPreferences:
    """alpha: value of arrival; beta: value of time; gamma[d-1]: disutility of a size-d carpool."""

    id: RiderId
    alpha: Fraction
    beta: Fraction
    gamma: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "alpha", Fraction(self.alpha))
        object.__setattr__(self, "beta", Fraction(self.beta))
        object.__setattr__(self, "gamma", tuple(Fraction(g) for g in self.gamma))
        if self.beta < 0:
            raise InstanceError(f"rider {self.id}: beta must be >= 0")
        if not self.gamma:
            raise InstanceError(f"rider {self.id}: gamma must list at least gamma(1)")
        if self.gamma[0] != 0:
            raise InstanceError(f"rider {self.id}: gamma(1) must be 0")
        if any(g < 0 for g in self.gamma):
            raise InstanceError(f"rider {self.id}: gamma must be non-negative")
        marginals = [b - a for a, b in zip(self.gamma, self.gamma[1:])]
        if any(m2 < m1 for m1, m2 in zip(marginals, marginals[1:])):
            raise InstanceError(f"rider {self.id}: marginal carpool disutility must be non-decreasing")


@dataclass(frozen=True)
class RepresentativeGroup:
    route: Route
    base: frozenset
    chosen: frozenset


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    witness: tuple | None = None

    def __bool__(self) -> bool:
        return self.ok


class MarketInstance:
    """A network, a rider population, the trip-cost rate and the car capacity.

    Riders are ordered as given; that order (the rider *index*) is what
    every "lowest rider id" tie-break refers to.
    """

    def __init__(
        self,
        network: Network,
        riders: Sequence[RiderPreferences],
        delta: Fraction,
        car_capacity: int,
    ):
        self.network = network
        self.riders = tuple(riders)
        self.delta = Fraction(delta)
        self.car_capacity = car_capacity
        if isinstance(car_capacity, bool) or not isinstance(car_capacity, int) or car_capacity < 1:
            raise InstanceError("car_capacity must be an integer >= 1")
        if self.delta < 0:
            raise InstanceError("delta must be >= 0")
        ids = [r.id for r in self.riders]
        if len(set(ids)) != len(ids):
            raise InstanceError("rider ids must be unique")
        for r in self.riders:
            if len(r.gamma) != car_capacity:
                raise InstanceError(
                    f"rider {r.id}: gamma has {len(r.gamma)} entries, expected car_capacity={car_capacity}"
                )
        self.index = {rid: i for i, rid in enumerate(ids)}
        self.by_id = {r.id: r for r in self.riders}
        if self.homogeneous_gamma:
            steps = [b - a for a, b in zip(self.theta, self.theta[1:])]
            if any(s2 < s1 for s1, s2 in zip(steps, steps[1:])):
                raise InstanceError("theta increments must be non-decreasing")

    @property
    def rider_ids(self) -> tuple:
        return tuple(r.id for r in self.riders)

    @cached_property
    def homogeneous_gamma(self) -> bool:
        return len({r.gamma for r in self.riders}) <= 1

    @cached_property
    def gamma(self) -> tuple[Fraction, ...]:
        """The shared disutility schedule (homogeneous instances only)."""
        if not self.homogeneous_gamma:
            raise HeterogeneousGammaError("a shared gamma")
        if not self.riders:
            return tuple(Fraction(0) for _ in range(self.car_capacity))
        return self.riders[0].gamma

    @cached_property
    def theta(self) -> tuple[Fraction, ...]:
        """theta[d] = d*gamma(d) + delta*d for d = 0..A."""
        g = self.gamma
        return (Fraction(0),) + tuple((d + 1) * g[d] + self.delta * (d + 1) for d in range(self.car_capacity))

    def eta(self, rider: RiderId, route: Route) -> Fraction:
        r = self.by_id[rider]
        return r.alpha - r.beta * route.travel_time

    def sorted_group(self, group: Iterable[RiderId]) -> tuple:
        return tuple(sorted(group, key=self.index.__getitem__))

    def without(self, rider: RiderId) -> "MarketInstance":
        return MarketInstance(
            self.network, [r for r in self.riders if r.id != rider], self.delta, self.car_capacity
        )

    def with_report(self, rider: RiderId, alpha: Fraction, beta: Fraction) -> "MarketInstance":
        riders = [
            RiderPreferences(r.id, alpha, beta, r.gamma) if r.id == rider else r for r in self.riders
        ]
        return MarketInstance(self.network, riders, self.delta, self.car_capacity)

    def __repr__(self) -> str:
        return (f"MarketInstance({self.network!r}, riders={len(self.riders)}, "
                f"delta={self.delta}, A={self.car_capacity})")


# --------------------------------------------------------------------------
# Values


def rider_trip_value(instance: MarketInstance, rider: RiderId, group: Iterable[RiderId], route: Route) -> Fraction:
    group = frozenset(group)
    if rider not in group:
        raise InstanceError(f"rider {rider!r} is not in the group")
    if len(group) > instance.car_capacity:
        raise InstanceError(f"group of {len(group)} exceeds car capacity {instance.car_capacity}")
    p = instance.by_id[rider]
    t = route.travel_time
    return p.alpha - p.beta * t - p.gamma[len(group) - 1] * t


def social_trip_value(instance: MarketInstance, group: Iterable[RiderId], route: Route) -> Fraction:
    group = frozenset(group)
    if not 1 <= len(group) <= instance.car_capacity:
        raise InstanceError(f"group size {len(group)} outside 1..{instance.car_capacity}")
    total = sum((rider_trip_value(instance, m, group, route) for m in group), Fraction(0))
    return total - instance.delta * len(group) * route.travel_time


def _best_subset_exhaustive(instance: MarketInstance, base: Sequence, route: Route) -> tuple[Fraction, tuple]:
    # ties: first in (size, lexicographic rider index) enumeration order
    best_value, best = Fraction(0), ()
    ordered = instance.sorted_group(base)
    for size in range(1, min(instance.car_capacity, len(ordered)) + 1):
        for sub in combinations(ordered, size):
            v = social_trip_value(instance, sub, route)
            if v > best_value:
                best_value, best = v, sub
    return best_value, best


def _best_subset_greedy(instance: MarketInstance, base: Sequence, route: Route) -> tuple[Fraction, tuple]:
    t = route.travel_time
    theta = instance.theta
    ranked = sorted(base, key=lambda m: (-instance.eta(m, route), instance.index[m]))
    chosen: list = []
    value = Fraction(0)
    for m in ranked:
        k = len(chosen)
        if k == instance.car_capacity:
            break
        step = (theta[k + 1] - theta[k]) * t
        eta = instance.eta(m, route)
        if eta < step:
            break
        chosen.append(m)
        value += eta - step
    return value, tuple(chosen)


def augmented_value(instance: MarketInstance, group: Iterable[RiderId], route: Route) -> tuple[Fraction, RepresentativeGroup]:
    """Best value of a feasible sub-trip of ``group`` on ``route``, with the sub-group.

    Homogeneous instances use the greedy descending-eta construction;
    otherwise all feasible subsets are enumerated.  The empty group is
    worth zero.
    """
    base = frozenset(group)
    if instance.homogeneous_gamma:
        value, chosen = _best_subset_greedy(instance, base, route)
    else:
        value, chosen = _best_subset_exhaustive(instance, base, route)
    return value, RepresentativeGroup(route, base, frozenset(chosen))


def augmented_value_exhaustive(instance: MarketInstance, group: Iterable[RiderId], route: Route) -> tuple[Fraction, frozenset]:
    value, chosen = _best_subset_exhaustive(instance, frozenset(group), route)
    return value, frozenset(chosen)


def feasible_groups(instance: MarketInstance, riders: Iterable[RiderId] | None = None) -> list[frozenset]:
    """All groups of size 1..A, ordered by size then rider index."""
    ordered = instance.sorted_group(riders if riders is not None else instance.rider_ids)
    out = []
    for size in range(1, min(instance.car_capacity, len(ordered)) + 1):
        out.extend(frozenset(c) for c in combinations(ordered, size))
    return out


# --------------------------------------------------------------------------
# Structural checks on a single route


def _subset_table(instance: MarketInstance, route: Route, universe: Sequence) -> list[Fraction]:
    n = len(universe)
    table = [Fraction(0)] * (1 << n)
    for mask in range(1, 1 << n):
        members = [universe[i] for i in range(n) if mask >> i & 1]
        table[mask] = augmented_value(instance, members, route)[0]
    return table


def _universe(instance: MarketInstance, riders: Iterable[RiderId] | None) -> tuple:
    return instance.sorted_group(riders if riders is not None else instance.rider_ids)


def _members(universe: Sequence, mask: int) -> tuple:
    return tuple(universe[i] for i in range(len(universe)) if mask >> i & 1)


def check_monotonicity(
    instance: MarketInstance,
    route: Route,
    riders: Iterable[RiderId] | None = None,
    augmented: bool = True,
) -> CheckResult:
    """Check V(b | b') >= V(b) for all groups.

    With ``augmented=True`` the augmented value is checked over all rider
    subsets (single-rider extensions suffice by transitivity).  With
    ``augmented=False`` the raw trip value is checked over pairs of
    feasible groups whose union is still feasible.  The witness is
    ``(b, b')`` for the first violation.
    """
    universe = _universe(instance, riders)
    n = len(universe)
    if n > MONOTONICITY_GUARD:
        raise EnumerationGuard("monotonicity check", n, MONOTONICITY_GUARD)
    if augmented:
        table = _subset_table(instance, route, universe)
        for mask in range(1 << n):
            for i in range(n):
                if not mask >> i & 1 and table[mask | 1 << i] < table[mask]:
                    return CheckResult(False, (_members(universe, mask), (universe[i],)))
        return CheckResult(True)

    groups = feasible_groups(instance, universe)
    for b in groups:
        vb = social_trip_value(instance, b, route)
        for b2 in groups:
            union = b | b2
            if union != b and len(union) <= instance.car_capacity:
                if social_trip_value(instance, union, route) < vb:
                    return CheckResult(False, (instance.sorted_group(b), instance.sorted_group(b2)))
    return CheckResult(True)


def check_gross_substitutes(
    instance: MarketInstance,
    route: Route,
    riders: Iterable[RiderId] | None = None,
) -> CheckResult:
    """Enumerate both gross-substitutes conditions for the augmented value.

    (a) marginal values shrink as the base set grows;
    (b) V(i,j|b) + V(k|b) <= max(V(i|b) + V(j,k|b), V(j|b) + V(i,k|b)).

    Witnesses are ``("a", b, b', i)`` or ``("b", b, i, j, k)``.
    """
    universe = _universe(instance, riders)
    n = len(universe)
    if n > GROSS_SUBSTITUTES_GUARD:
        raise EnumerationGuard("gross-substitutes check", n, GROSS_SUBSTITUTES_GUARD)
    V = _subset_table(instance, route, universe)

    def marg(add: int, base: int) -> Fraction:
        return V[base | add] - V[base]

    full = (1 << n) - 1
    for big in range(1 << n):
        # every subset `small` of `big`
        small = big
        while True:
            for i in range(n):
                bit = 1 << i
                if not big & bit and marg(bit, big) > marg(bit, small):
                    return CheckResult(False, ("a", _members(universe, small), _members(universe, big), universe[i]))
            if small == 0:
                break
            small = (small - 1) & big

    for base in range(1 << n):
        outside = [i for i in range(n) if not base >> i & 1]
        for i in outside:
            for j in outside:
                for k in outside:
                    if len({i, j, k}) < 3:
                        continue
                    bi, bj, bk = 1 << i, 1 << j, 1 << k
                    lhs = marg(bi | bj, base) + marg(bk, base)
                    rhs = max(marg(bi, base) + marg(bj | bk, base), marg(bj, base) + marg(bi | bk, base))
                    if lhs > rhs:
                        return CheckResult(
                            False, ("b", _members(universe, base), universe[i], universe[j], universe[k])
                        )
    assert full >= 0
    return CheckResult(True)
