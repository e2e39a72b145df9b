"""Dual prices, payments, equilibrium verification and existence."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from . import oracle
from .auction import (
    AuctionResult,
    TripVector,
    build_auxiliary,
    chi,
    kelso_crawford,
)
from .network import (
    Route,
    RouteCapacityVector,
    greedy_route_capacities,
    is_series_parallel,
)
from .preferences import (
    EnumerationGuard,
    HeterogeneousGammaError,
    MarketInstance,
    feasible_groups,
    rider_trip_value,
    social_trip_value,
)
from .simplex import OPTIMAL, LPError, solve_lp

ENUMERATION_GUARD = 8
MAX_DUAL_ROUNDS = 10_000


# --------------------------------------------------------------------------
# Separation


def best_group(instance: MarketInstance, route: Route, utilities: dict) -> tuple[Fraction, frozenset]:
    """max over feasible non-empty b of V_r(b) - sum_b u, with an arg-max.

    Homogeneous disutility makes this a top-k problem on eta - u; ties
    favour smaller groups, then lower rider ids.  Otherwise every group
    is enumerated (guarded).
    """
    if instance.homogeneous_gamma:
        t = route.travel_time
        theta = instance.theta
        ranked = sorted(
            instance.rider_ids,
            key=lambda m: (-(instance.eta(m, route) - utilities[m]), instance.index[m]),
        )
        best, best_k, prefix = None, 0, Fraction(0)
        for k, m in enumerate(ranked[: instance.car_capacity], start=1):
            prefix += instance.eta(m, route) - utilities[m]
            val = prefix - theta[k] * t
            if best is None or val > best:
                best, best_k = val, k
        if best is None:
            return Fraction(0), frozenset()
        return best, frozenset(ranked[:best_k])
    if len(instance.riders) > ENUMERATION_GUARD:
        raise EnumerationGuard("group enumeration", len(instance.riders), ENUMERATION_GUARD)
    best, arg = None, frozenset()
    for b in feasible_groups(instance):
        val = social_trip_value(instance, b, route) - sum((utilities[m] for m in b), Fraction(0))
        if best is None or val > best:
            best, arg = val, b
    return (Fraction(0), frozenset()) if best is None else (best, arg)


def route_toll(route: Route, tolls: dict) -> Fraction:
    return sum((tolls[e] for e in route.edges), Fraction(0))


# --------------------------------------------------------------------------
# Dual program


@dataclass
class DualSolution:
    utilities: dict
    tolls: dict
    objective: Fraction
    rounds: int
    constraints: int


def _dual_lp(instance: MarketInstance, cuts: list[tuple[frozenset, Route]]):
    riders = instance.rider_ids
    edges = instance.network.edges
    c = [Fraction(1)] * len(riders) + [Fraction(e.capacity) for e in edges]
    A, b = [], []
    for group, route in cuts:
        A.append([1 if m in group else 0 for m in riders] + [1 if e.id in route.edges else 0 for e in edges])
        b.append(social_trip_value(instance, group, route))
    return c, A, b


def _unpack(instance: MarketInstance, x: list[Fraction]) -> tuple[dict, dict]:
    n = len(instance.riders)
    u = dict(zip(instance.rider_ids, x[:n]))
    tau = {e.id: v for e, v in zip(instance.network.edges, x[n:])}
    return u, tau


def solve_dual(instance: MarketInstance, use_augmented: bool = True) -> DualSolution:
    """Minimise sum u + sum q tau subject to every trip constraint, exactly.

    With ``use_augmented`` (homogeneous disutility only) constraints are
    generated lazily: each round adds, per route, the most violated group
    from the top-k separation oracle and re-solves.  Otherwise all
    positive-value (group, route) constraints are enumerated up front.
    """
    routes = instance.network.routes
    if use_augmented:
        if not instance.homogeneous_gamma:
            raise HeterogeneousGammaError("the augmented dual")
        cuts: list[tuple[frozenset, Route]] = []
        present: set = set()
        rounds = 0
        n = len(instance.riders) + len(instance.network.edges)
        x = [Fraction(0)] * n
        while True:
            u, tau = _unpack(instance, x)
            added = 0
            for r in routes:
                val, group = best_group(instance, r, u)
                if group and val > route_toll(r, tau) and (group, r) not in present:
                    present.add((group, r))
                    cuts.append((group, r))
                    added += 1
            if not added:
                break
            rounds += 1
            if rounds > MAX_DUAL_ROUNDS:
                raise LPError("constraint generation did not converge")
            c, A, b = _dual_lp(instance, cuts)
            res = solve_lp(c, A_lb=A, b_lb=b)
            if res.status != OPTIMAL:
                raise LPError(f"dual program is {res.status}")
            x = res.x
        u, tau = _unpack(instance, x)
        obj = sum(u.values(), Fraction(0)) + sum(
            (e.capacity * tau[e.id] for e in instance.network.edges), Fraction(0)
        )
        return DualSolution(u, tau, obj, rounds, len(cuts))

    if len(instance.riders) > ENUMERATION_GUARD:
        raise EnumerationGuard("dual enumeration", len(instance.riders), ENUMERATION_GUARD)
    cuts = [(g, r) for g in feasible_groups(instance) for r in routes if social_trip_value(instance, g, r) > 0]
    if not cuts:
        n = len(instance.riders) + len(instance.network.edges)
        u, tau = _unpack(instance, [Fraction(0)] * n)
        return DualSolution(u, tau, Fraction(0), 0, 0)
    c, A, b = _dual_lp(instance, cuts)
    res = solve_lp(c, A_lb=A, b_lb=b)
    if res.status != OPTIMAL:
        raise LPError(f"dual program is {res.status}")
    u, tau = _unpack(instance, res.x)
    return DualSolution(u, tau, res.objective, 1, len(cuts))


def solve_route_toll_dual(instance: MarketInstance, capacities: RouteCapacityVector) -> tuple[dict, dict, Fraction]:
    """Dual of the route-capacity LP: utilities and per-route tolls lambda.

    Enumerates all constraints; intended for small cross-checks.
    """
    if len(instance.riders) > ENUMERATION_GUARD:
        raise EnumerationGuard("route-toll dual", len(instance.riders), ENUMERATION_GUARD)
    riders = instance.rider_ids
    routes = capacities.support
    c = [Fraction(1)] * len(riders) + [Fraction(k) for _, k in capacities.items()]
    A, b = [], []
    for g in feasible_groups(instance):
        for j, r in enumerate(routes):
            v = social_trip_value(instance, g, r)
            if v > 0:
                A.append([1 if m in g else 0 for m in riders] + [1 if i == j else 0 for i in range(len(routes))])
                b.append(v)
    if not A:
        return {m: Fraction(0) for m in riders}, {r: Fraction(0) for r in routes}, Fraction(0)
    res = solve_lp(c, A_lb=A, b_lb=b)
    if res.status != OPTIMAL:
        raise LPError(f"route-toll dual is {res.status}")
    n = len(riders)
    return dict(zip(riders, res.x[:n])), dict(zip(routes, res.x[n:])), res.objective


# --------------------------------------------------------------------------
# Outcomes


@dataclass
class Outcome:
    x: TripVector
    payments: dict
    tolls: dict

    def utilities(self, instance: MarketInstance) -> dict:
        assigned = self.x.assignment()
        out = {}
        for m in instance.rider_ids:
            value = Fraction(0)
            if m in assigned:
                g, r = assigned[m]
                value = rider_trip_value(instance, m, g, r)
            out[m] = value - self.payments.get(m, Fraction(0))
        return out


def payments_from_utilities(x: TripVector, utilities: dict, instance: MarketInstance) -> dict:
    """p = trip value - utility for assigned riders, zero otherwise."""
    negative = [m for m, u in utilities.items() if u < 0]
    if negative:
        raise ValueError(f"negative utilities for riders {negative}")
    assigned = x.assignment()
    payments = {}
    for m in instance.rider_ids:
        if m in assigned:
            g, r = assigned[m]
            payments[m] = rider_trip_value(instance, m, g, r) - utilities[m]
        else:
            payments[m] = Fraction(0)
    return payments


FLAGS = (
    "feasible",
    "individual_rationality",
    "stability",
    "budget_balance",
    "market_clearing",
    "complementary_slackness",
    "toll_monotonicity",
)


# toll_monotonicity is reported but is not part of the equilibrium verdict:
# an unused long route can carry a higher toll than a shorter one in every
# equilibrium of some markets.
VERDICT_FLAGS = FLAGS[:-1]


@dataclass
class EquilibriumReport:
    flags: dict
    witnesses: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(self.flags[f] for f in VERDICT_FLAGS)

    def fail(self, flag: str, detail: str) -> None:
        self.flags[flag] = False
        self.witnesses.append({"check": flag, "detail": detail})


def verify_equilibrium(outcome: Outcome, instance: MarketInstance) -> EquilibriumReport:
    """Check every equilibrium property exactly, collecting witnesses."""
    report = EquilibriumReport({f: True for f in FLAGS})
    network = instance.network
    x, p, tau = outcome.x, outcome.payments, outcome.tolls

    for problem in x.feasibility_violations(instance):
        report.fail("feasible", problem)
    unknown_riders = set(p) - set(instance.rider_ids)
    unknown_edges = set(tau) - set(network.edge_by_id)
    if unknown_riders or unknown_edges:
        report.fail("feasible", f"unknown ids: {sorted(map(str, unknown_riders | unknown_edges))}")
    if not report.flags["feasible"]:
        for f in FLAGS[1:]:
            report.flags[f] = False
        return report
    tau = {e.id: Fraction(tau.get(e.id, 0)) for e in network.edges}
    p = {m: Fraction(p.get(m, 0)) for m in instance.rider_ids}
    outcome = Outcome(x, p, tau)
    u = outcome.utilities(instance)
    assigned = x.assignment()
    loads = x.edge_loads()

    for e in network.edges:
        if tau[e.id] < 0:
            report.fail("market_clearing", f"edge {e.id} has negative toll {tau[e.id]}")

    for m in instance.rider_ids:
        if u[m] < 0:
            report.fail("individual_rationality", f"rider {m} utility {u[m]}")

    for r in network.routes:
        val, group = best_group(instance, r, u)
        if group and val > route_toll(r, tau):
            report.fail(
                "stability",
                f"group {list(instance.sorted_group(group))} on {r.name} gains {val - route_toll(r, tau)}",
            )

    for g, r in x.trips():
        paid = sum((p[m] for m in g), Fraction(0))
        owed = route_toll(r, tau) + instance.delta * len(g) * r.travel_time
        if paid != owed:
            report.fail(
                "budget_balance",
                f"trip {list(instance.sorted_group(g))} on {r.name} pays {paid}, owes {owed}",
            )
        surplus = sum((u[m] for m in g), Fraction(0))
        if surplus != social_trip_value(instance, g, r) - route_toll(r, tau):
            report.fail("complementary_slackness", f"trip {list(instance.sorted_group(g))} on {r.name} is not tight")
    for m in instance.rider_ids:
        if m not in assigned:
            if p[m] != 0:
                report.fail("budget_balance", f"unassigned rider {m} pays {p[m]}")
            if u[m] > 0:
                report.fail("complementary_slackness", f"unassigned rider {m} has utility {u[m]}")

    for e in network.edges:
        if loads.get(e.id, 0) < e.capacity and tau[e.id] != 0:
            report.fail("market_clearing", f"edge {e.id} has slack but toll {tau[e.id]}")
            report.fail("complementary_slackness", f"edge {e.id} tolled but unsaturated")

    bad = toll_monotonicity_violation(network.routes, tau)
    if bad:
        r1, r2 = bad
        report.fail(
            "toll_monotonicity",
            f"{r1.name} (t={r1.travel_time}) tolled {route_toll(r1, tau)} > "
            f"{r2.name} (t={r2.travel_time}) tolled {route_toll(r2, tau)}",
        )
    return report


def toll_monotonicity_violation(
    routes: Iterable[Route],
    tolls: dict,
    longer: Iterable[Route] | None = None,
) -> tuple[Route, Route] | None:
    """First pair with t_r >= t_r' but a strictly larger route toll on r.

    ``longer`` restricts r (for example to routes that carry trips).
    """
    routes = list(routes)
    for r in routes if longer is None else list(longer):
        for r2 in routes:
            if r.travel_time >= r2.travel_time and route_toll(r, tolls) > route_toll(r2, tolls):
                return r, r2
    return None


# --------------------------------------------------------------------------
# Pipelines


@dataclass
class PipelineResult:
    capacities: RouteCapacityVector
    auction: AuctionResult
    x: TripVector
    welfare: Fraction
    series_parallel: bool

    @property
    def verified(self) -> bool:
        """False when the network is not series-parallel: optimality is then unproven."""
        return self.series_parallel


def auction_pipeline(
    instance: MarketInstance,
    epsilon: Fraction | None = None,
    backend: str | None = None,
    capacities: RouteCapacityVector | None = None,
) -> PipelineResult:
    """Greedy route capacities, ascending auction, then trip conversion."""
    k = capacities if capacities is not None else greedy_route_capacities(instance.network)
    aux = build_auxiliary(k)
    result = kelso_crawford(instance, aux, epsilon, backend)
    x = chi(result.assignment, instance)
    return PipelineResult(k, result, x, x.welfare(instance), is_series_parallel(instance.network))


@dataclass
class ExistenceResult:
    exists: bool
    lp_value: Fraction | None
    ip_value: Fraction | None
    outcome: Outcome | None = None
    dual: DualSolution | None = None
    method: str = ""
    pipeline: PipelineResult | None = None
    lp_solution: dict | None = None

    @property
    def gap(self) -> Fraction | None:
        if self.lp_value is None or self.ip_value is None:
            return None
        return self.lp_value - self.ip_value


def _guard_breach(instance: MarketInstance) -> EnumerationGuard | None:
    """The first enumeration guard the instance exceeds, if any.

    A route count above the network's cap raises RouteLimitExceeded here.
    """
    if len(instance.riders) > oracle.MAX_BRUTE_RIDERS:
        return EnumerationGuard("brute-force rider count", len(instance.riders), oracle.MAX_BRUTE_RIDERS)
    n_routes = len(instance.network.routes)
    if n_routes > oracle.MAX_BRUTE_ROUTES:
        return EnumerationGuard("brute-force route count", n_routes, oracle.MAX_BRUTE_ROUTES)
    return None


def equilibrium_exists(
    instance: MarketInstance,
    epsilon: Fraction | None = None,
    backend: str | None = None,
) -> ExistenceResult:
    """Decide existence by comparing the LP relaxation with the integer optimum.

    Equal optima yield an outcome (auction path on series-parallel
    networks with homogeneous disutility, exhaustive search otherwise)
    priced by the exact dual.  A strict gap is returned as the
    certificate of non-existence.  Past the enumeration guards only the
    series-parallel homogeneous case is decided, by construction.
    """
    sp = is_series_parallel(instance.network)
    guided = sp and instance.homogeneous_gamma
    breach = _guard_breach(instance)
    if breach is not None:
        if not guided:
            raise breach
        pipe = auction_pipeline(instance, epsilon, backend)
        dual = solve_dual(instance, use_augmented=True)
        payments = payments_from_utilities(pipe.x, dual.utilities, instance)
        return ExistenceResult(
            True, dual.objective, pipe.welfare, Outcome(pipe.x, payments, dual.tolls), dual, "auction", pipe
        )

    lp_x, lp_value = oracle.solve_lp_relaxation(instance)
    ip_x, ip_value = oracle.brute_force_ip(instance)
    if lp_value != ip_value:
        return ExistenceResult(False, lp_value, ip_value, method="gap", lp_solution=lp_x)

    pipe = None
    if guided:
        pipe = auction_pipeline(instance, epsilon, backend)
        x = pipe.x
        if pipe.welfare != ip_value:
            raise LPError(f"auction welfare {pipe.welfare} differs from the optimum {ip_value}")
        dual = solve_dual(instance, use_augmented=True)
        method = "auction"
    else:
        x = ip_x
        dual = solve_dual(instance, use_augmented=instance.homogeneous_gamma)
        method = "enumeration"
    if dual.objective != lp_value:
        raise LPError(f"dual optimum {dual.objective} differs from the LP optimum {lp_value}")
    payments = payments_from_utilities(x, dual.utilities, instance)
    return ExistenceResult(
        True, lp_value, ip_value, Outcome(x, payments, dual.tolls), dual, method, pipe, lp_x
    )
