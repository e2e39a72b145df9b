import random
from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, strategies as st
from scipy.optimize import linprog

from carpool.equilibrium import auction_pipeline
from carpool.generators import random_dag_network, random_market
from carpool.network import Edge, Network, NotSeriesParallel, greedy_route_capacities
from carpool.oracle import (
    brute_force_ip,
    brute_force_ip_naive,
    dual_face_extremes,
    dual_optimal_vertices,
    enumerate_vertices,
    fractional_welfare,
    group_sensitivity,
    lp_feasibility_violations,
    lp_k_violations,
    optimal_face_is_singleton,
    reassign_to_subnetwork,
    single_rider_fixture,
    solve_lp_k,
    solve_lp_relaxation,
    wheatstone_fixture,
)
from carpool.preferences import (
    EnumerationGuard,
    MarketInstance,
    RiderPreferences,
    feasible_groups,
    social_trip_value,
)

from conftest import seeds, sp_markets


@st.composite
def any_markets(draw):
    """Small markets on arbitrary acyclic networks, sometimes heterogeneous."""
    rng = random.Random(draw(seeds))
    net = None
    while net is None:
        net = random_dag_network(rng, rng.randint(2, 5), rng.randint(1, 6))
    return random_market(rng, net, 5, heterogeneous=rng.random() < 0.4)


def scipy_lp_value(instance):
    cols = [(g, r) for g in feasible_groups(instance) for r in instance.network.routes]
    if not cols:
        return 0.0
    c = [-float(social_trip_value(instance, g, r)) for g, r in cols]
    A, b = [], []
    for m in instance.rider_ids:
        A.append([1.0 if m in g else 0.0 for g, _ in cols])
        b.append(1.0)
    for e in instance.network.edges:
        A.append([1.0 if e.id in r.edges else 0.0 for _, r in cols])
        b.append(float(e.capacity))
    res = linprog(c, A_ub=A, b_ub=b, bounds=(0, None), method="highs")
    return -res.fun


# integer optimum


def test_wheatstone_integer_optimum():
    x, value = brute_force_ip(wheatstone_fixture())
    assert value == 10
    ((group, route),) = x.trips()
    assert len(group) == 2 and route.edges == ("e1", "e5", "e4")


def test_single_rider_integer_optimum():
    inst = single_rider_fixture()
    x, value = brute_force_ip(inst)
    assert value == 8 and len(x) == 1
    losing = MarketInstance(inst.network, [RiderPreferences("1", 1, 2, (0,))], Fraction(0), 1)
    x, value = brute_force_ip(losing)
    assert value == 0 and len(x) == 0


@given(any_markets())
def test_two_integer_searches_agree(inst):
    x, value = brute_force_ip(inst)
    assert value == brute_force_ip_naive(inst)
    assert x.is_feasible(inst) and x.welfare(inst) == value


def test_guards():
    riders = [RiderPreferences(str(i), 5, 0, (0,)) for i in range(9)]
    inst = MarketInstance(single_rider_fixture().network, riders, Fraction(0), 1)
    with pytest.raises(EnumerationGuard):
        brute_force_ip(inst)
    with pytest.raises(EnumerationGuard):
        solve_lp_relaxation(inst)


# LP relaxation


def test_wheatstone_lp_half_integral_vertex():
    inst = wheatstone_fixture()
    x, value = solve_lp_relaxation(inst)
    assert value == 11
    assert set(x.values()) == {Fraction(1, 2)}
    groups = sorted(tuple(sorted(g)) for g, _ in x)
    assert groups == [("1", "2"), ("1", "3"), ("2", "3")]
    assert len({r for _, r in x}) == 3
    assert not lp_feasibility_violations(x, inst)
    assert fractional_welfare(x, inst) == 11


def test_wheatstone_lp_optimum_is_not_unique():
    inst = wheatstone_fixture()
    r1, r2, r3 = inst.network.routes
    half = Fraction(1, 2)
    a = {(frozenset({"1", "2"}), r1): half, (frozenset({"2", "3"}), r2): half, (frozenset({"1", "3"}), r3): half}
    b = {(frozenset({"1", "3"}), r1): half, (frozenset({"2", "3"}), r2): half, (frozenset({"1", "2"}), r3): half}
    for x in (a, b):
        assert not lp_feasibility_violations(x, inst)
        assert fractional_welfare(x, inst) == 11
    assert not optimal_face_is_singleton(inst)


def test_slack_single_route_lp_is_integral():
    inst = single_rider_fixture()
    x, value = solve_lp_relaxation(inst)
    assert value == brute_force_ip(inst)[1] == 8
    assert set(x.values()) == {1}
    assert optimal_face_is_singleton(inst)


@given(any_markets())
def test_lp_matches_scipy_and_bounds_the_integer_optimum(inst):
    x, value = solve_lp_relaxation(inst)
    assert float(value) == pytest.approx(scipy_lp_value(inst), abs=1e-7)
    assert value >= brute_force_ip(inst)[1]
    assert not lp_feasibility_violations(x, inst)
    assert fractional_welfare(x, inst) == value


@given(sp_markets())
def test_series_parallel_markets_have_no_gap(inst):
    assert solve_lp_relaxation(inst)[1] == brute_force_ip(inst)[1] == auction_pipeline(inst).welfare


# reassignment


def two_lanes():
    edges = [Edge("short", "o", "d", 1, Fraction(1)), Edge("long", "o", "d", 1, Fraction(2))]
    return Network(["o", "d"], "o", "d", edges)


def test_group_sensitivity():
    inst = wheatstone_fixture()
    z, g = group_sensitivity(inst, {"1", "2"})
    for r in inst.network.routes:
        assert social_trip_value(inst, {"1", "2"}, r) == z - g * r.travel_time


def test_reassignment_fixed_point():
    inst = single_rider_fixture()
    k = greedy_route_capacities(inst.network)
    x = {(frozenset({"1"}), inst.network.routes[0]): Fraction(1)}
    assert reassign_to_subnetwork(x, k, inst) == x


def test_reassignment_puts_sensitive_group_on_short_route():
    net = two_lanes()
    riders = [RiderPreferences("hi", 20, 5, (0,)), RiderPreferences("lo", 20, 3, (0,))]
    inst = MarketInstance(net, riders, Fraction(0), 1)
    short, long_ = sorted(net.routes, key=lambda r: r.travel_time)
    assert group_sensitivity(inst, {"hi"})[1] == 5 and group_sensitivity(inst, {"lo"})[1] == 3
    xhat = {(frozenset({"hi"}), long_): Fraction(1), (frozenset({"lo"}), short): Fraction(1)}
    out = reassign_to_subnetwork(xhat, greedy_route_capacities(net), inst)
    assert out == {(frozenset({"hi"}), short): Fraction(1), (frozenset({"lo"}), long_): Fraction(1)}
    # (20-5) + (20-6) = 29 beats (20-10) + (20-3) = 27
    assert fractional_welfare(out, inst) == 29 > fractional_welfare(xhat, inst) == 27


def test_reassignment_splits_at_capacity_boundaries():
    net = two_lanes()
    riders = [RiderPreferences(str(i), 10, i, (0,)) for i in (1, 2, 3)]
    inst = MarketInstance(net, riders, Fraction(0), 1)
    short, long_ = sorted(net.routes, key=lambda r: r.travel_time)
    xhat = {(frozenset({str(i)}), short): Fraction(2, 3) for i in (1, 2, 3)}
    out = reassign_to_subnetwork(xhat, greedy_route_capacities(net), inst)
    assert out[(frozenset({"3"}), short)] == Fraction(2, 3)
    assert out[(frozenset({"2"}), short)] == Fraction(1, 3)
    assert out[(frozenset({"2"}), long_)] == Fraction(1, 3)
    assert out[(frozenset({"1"}), long_)] == Fraction(2, 3)


def test_reassignment_needs_series_parallel():
    inst = wheatstone_fixture()
    x, _ = solve_lp_relaxation(inst)
    with pytest.raises(NotSeriesParallel):
        reassign_to_subnetwork(x, greedy_route_capacities(inst.network), inst)


@given(sp_markets())
def test_reassignment_is_feasible_and_never_loses_welfare(inst):
    k = greedy_route_capacities(inst.network)
    x, value = solve_lp_relaxation(inst)
    out = reassign_to_subnetwork(x, k, inst)
    assert not lp_k_violations(out, k, inst)
    assert fractional_welfare(out, inst) >= value
    assert fractional_welfare(out, inst) <= solve_lp_k(inst, k)[1]


# vertex enumeration


def gauss_solve(rows, rhs):
    """Unique solution of a square rational system, or None."""
    n = len(rows)
    m = [list(r) + [b] for r, b in zip(rows, rhs)]
    for col in range(n):
        piv = next((i for i in range(col, n) if m[i][col] != 0), None)
        if piv is None:
            return None
        m[col], m[piv] = m[piv], m[col]
        for i in range(n):
            if i != col and m[i][col] != 0:
                f = m[i][col] / m[col][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[col])]
    return tuple(m[i][n] / m[i][i] for i in range(n))


def vertices_by_brute_force(n, A_ge, b_ge, A_eq, b_eq):
    unit = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    candidates = [(row, b) for row, b in zip(A_ge, b_ge)] + [(u, Fraction(0)) for u in unit]
    found = set()
    need = n - len(A_eq)
    for pick in combinations(range(len(candidates)), need):
        rows = [candidates[i][0] for i in pick] + list(A_eq)
        rhs = [candidates[i][1] for i in pick] + list(b_eq)
        y = gauss_solve(rows, rhs)
        if y is None or any(v < 0 for v in y):
            continue
        if all(sum(a * v for a, v in zip(row, y)) >= b for row, b in zip(A_ge, b_ge)) and all(
            sum(a * v for a, v in zip(row, y)) == b for row, b in zip(A_eq, b_eq)
        ):
            found.add(y)
    return sorted(found)


@given(seeds, st.booleans())
def test_vertex_enumeration_matches_brute_force(seed, prune):
    rng = random.Random(seed)
    n = rng.randint(1, 3)
    m = rng.randint(1, 4)
    A_ge = [[Fraction(rng.randint(0, 3)) for _ in range(n)] for _ in range(m)]
    b_ge = [Fraction(rng.randint(0, 6)) for _ in range(m)]
    A_eq, b_eq = [], []
    if n > 1 and rng.random() < 0.3:
        A_eq = [[Fraction(rng.randint(0, 2)) for _ in range(n)]]
        b_eq = [Fraction(rng.randint(1, 6))]
    # bounded: cap the sum of the variables
    A_ge.append([Fraction(-1)] * n)
    b_ge.append(Fraction(-10))
    expected = vertices_by_brute_force(n, A_ge, b_ge, A_eq, b_eq)
    assert enumerate_vertices(n, A_ge, b_ge, A_eq, b_eq, prune=prune) == expected


@given(sp_markets(max_edges=5, max_riders=4))
def test_dual_face_extremes_match_vertices(inst):
    x, _ = brute_force_ip(inst)
    vertices = dual_optimal_vertices(inst, x)
    assert vertices
    best_u, min_revenue = dual_face_extremes(inst, x)
    caps = {e.id: e.capacity for e in inst.network.edges}
    for m in inst.rider_ids:
        assert best_u[m] == max(u[m] for u, _ in vertices)
    assert min_revenue == min(sum(caps[e] * t for e, t in tau.items()) for _, tau in vertices)
    value = x.welfare(inst)
    for u, tau in vertices:
        assert sum(u.values()) + sum(caps[e] * t for e, t in tau.items()) == value
