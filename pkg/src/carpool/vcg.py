"""Externality (VCG) payments, the matching minimum-revenue tolls, and a
misreport probe."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .auction import TripVector
from .equilibrium import (
    Outcome,
    PipelineResult,
    auction_pipeline,
    best_group,
)
from .network import RouteCapacityVector, greedy_route_capacities, is_series_parallel
from .preferences import (
    HeterogeneousGammaError,
    InstanceError,
    MarketInstance,
    rider_trip_value,
)
from .simplex import OPTIMAL, LPError, solve_lp


class VcgPreconditionError(ValueError):
    """Raised when VCG prices are requested for a market without a guaranteed equilibrium."""


@dataclass
class VcgResult:
    x: TripVector
    payments: dict
    utilities: dict
    tolls: dict
    welfare: Fraction
    counterfactual_welfare: dict
    capacities: RouteCapacityVector
    pipeline: PipelineResult
    edge_capacities: dict

    @property
    def outcome(self) -> Outcome:
        return Outcome(self.x, self.payments, self.tolls)

    @property
    def revenue(self) -> Fraction:
        return sum((self.edge_capacities[e] * t for e, t in self.tolls.items()), Fraction(0))


def _require_guaranteed(instance: MarketInstance) -> None:
    if not instance.homogeneous_gamma:
        raise HeterogeneousGammaError("VCG pricing")
    if not is_series_parallel(instance.network):
        raise VcgPreconditionError("VCG pricing requires a series-parallel network")


def _trip_value_of(instance: MarketInstance, x: TripVector, rider) -> Fraction:
    assigned = x.assignment()
    if rider not in assigned:
        return Fraction(0)
    g, r = assigned[rider]
    return rider_trip_value(instance, rider, g, r)


def vcg_payments(
    instance: MarketInstance,
    epsilon: Fraction | None = None,
    backend: str | None = None,
) -> VcgResult:
    """Each rider pays the welfare the others lose because of them.

    Counterfactual markets without a rider reuse the full market's greedy
    route capacities.  Tolls come from :func:`vcg_tolls`.
    """
    _require_guaranteed(instance)
    k = greedy_route_capacities(instance.network)
    pipe = auction_pipeline(instance, epsilon, backend, capacities=k)
    welfare = pipe.welfare
    counterfactual = {}
    utilities = {}
    payments = {}
    for m in instance.rider_ids:
        without = auction_pipeline(instance.without(m), epsilon, backend, capacities=k).welfare
        counterfactual[m] = without
        utilities[m] = welfare - without
        payments[m] = _trip_value_of(instance, pipe.x, m) - utilities[m]
    tolls = vcg_tolls(instance, utilities, pipe.x, k)
    return VcgResult(
        pipe.x,
        payments,
        utilities,
        tolls,
        welfare,
        counterfactual,
        k,
        pipe,
        {e.id: e.capacity for e in instance.network.edges},
    )


def vcg_tolls(
    instance: MarketInstance,
    utilities: dict,
    x: TripVector,
    capacities: RouteCapacityVector,
) -> dict:
    """Edge tolls matching the given utilities.

    Solves a zero-objective LP over tau >= 0: each greedy route's toll
    equals its best surplus max(0, max_b V_r(b) - sum_b u); every other
    route's toll is at least that; edges with spare capacity under ``x``
    carry no toll.
    """
    _require_guaranteed(instance)
    edges = instance.network.edges
    loads = x.edge_loads()
    support = set(capacities.support)
    A_eq, b_eq, A_lb, b_lb = [], [], [], []
    for r in instance.network.routes:
        val, _ = best_group(instance, r, utilities)
        rhs = max(Fraction(0), val)
        row = [1 if e.id in r.edges else 0 for e in edges]
        if r in support:
            A_eq.append(row)
            b_eq.append(rhs)
        else:
            A_lb.append(row)
            b_lb.append(rhs)
    for i, e in enumerate(edges):
        if loads.get(e.id, 0) < e.capacity:
            A_eq.append([1 if j == i else 0 for j in range(len(edges))])
            b_eq.append(Fraction(0))
    res = solve_lp([0] * len(edges), A_eq=A_eq, b_eq=b_eq, A_lb=A_lb, b_lb=b_lb)
    if res.status != OPTIMAL:
        raise LPError(f"toll system is {res.status}")
    return {e.id: v for e, v in zip(edges, res.x)}


@dataclass
class ProbeResult:
    rider: object
    misreport: tuple[Fraction, Fraction]
    truthful_utility: Fraction
    misreport_utility: Fraction

    @property
    def profitable(self) -> bool:
        return self.misreport_utility > self.truthful_utility


def strategyproofness_probe(
    instance: MarketInstance,
    rider,
    alpha: Fraction,
    beta: Fraction,
    truthful: VcgResult | None = None,
    epsilon: Fraction | None = None,
    backend: str | None = None,
) -> ProbeResult:
    """Rider's true utility when reporting (alpha, beta) instead of the truth.

    Only the deviating rider's VCG payment is recomputed; the market
    without that rider does not depend on its report.
    """
    if rider not in instance.by_id:
        raise InstanceError(f"unknown rider {rider!r}")
    try:
        alpha, beta = Fraction(alpha), Fraction(beta)
    except (TypeError, ValueError) as exc:
        raise InstanceError(f"malformed misreport: {exc}") from exc
    if beta < 0:
        raise InstanceError("misreported beta must be >= 0")
    if truthful is None:
        truthful = vcg_payments(instance, epsilon, backend)
    reported = instance.with_report(rider, alpha, beta)
    k = truthful.capacities
    pipe = auction_pipeline(reported, epsilon, backend, capacities=k)
    reported_utility = pipe.welfare - truthful.counterfactual_welfare[rider]
    payment = _trip_value_of(reported, pipe.x, rider) - reported_utility
    true_utility = _trip_value_of(instance, pipe.x, rider) - payment
    return ProbeResult(rider, (alpha, beta), truthful.utilities[rider], true_utility)


def _five_distinct(values: list[Fraction], start: Fraction) -> list[Fraction]:
    out = list(dict.fromkeys(values))
    step = 1
    while len(out) < 5:
        extra = start + step
        if extra not in out:
            out.append(extra)
        step += 1
    return out


def misreport_grid(alpha: Fraction, beta: Fraction) -> list[tuple[Fraction, Fraction]]:
    """25 distinct reports around the truth.

    alpha' from {0, a/2, a, 3a/2, 2a+5} and beta' from {0, b/2, b, 2b, b+1};
    coinciding values (b = 0 or b = 1, say) are replaced by a+1, a+2, ...
    or b+2, b+3, ... so each axis keeps five points.
    """
    alphas = _five_distinct([Fraction(0), alpha / 2, alpha, alpha * 3 / 2, alpha * 2 + 5], alpha)
    betas = _five_distinct([Fraction(0), beta / 2, beta, beta * 2, beta + 1], beta + 1)
    return [(a, b) for a in alphas for b in betas]
