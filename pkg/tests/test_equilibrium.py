import random
from fractions import Fraction

import pytest
from hypothesis import given

from carpool.auction import TripVector
from carpool.equilibrium import (
    FLAGS,
    VERDICT_FLAGS,
    Outcome,
    auction_pipeline,
    best_group,
    equilibrium_exists,
    payments_from_utilities,
    route_toll,
    solve_dual,
    solve_route_toll_dual,
    toll_monotonicity_violation,
    verify_equilibrium,
)
from carpool.generators import random_market
from carpool.network import Edge, Network, greedy_route_capacities
from carpool.oracle import (
    brute_force_ip,
    dual_optimal_vertices,
    one_slot_fixture,
    parallel_fixture,
    single_rider_fixture,
    solve_lp_k,
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


def all_integer_outcomes(instance):
    """Every feasible integer trip vector (tiny instances only)."""
    columns = [(g, r) for g in feasible_groups(instance) for r in instance.network.routes]
    found = []

    def extend(i, chosen, used, loads):
        if i == len(columns):
            found.append(TripVector(chosen))
            return
        extend(i + 1, chosen, used, loads)
        g, r = columns[i]
        if used & g:
            return
        new = dict(loads)
        for e in r.edges:
            new[e] = new.get(e, 0) + 1
            if new[e] > instance.network.edge_by_id[e].capacity:
                return
        extend(i + 1, chosen + [(g, r)], used | g, new)

    extend(0, [], frozenset(), {})
    return found


# separation


@given(sp_markets(max_edges=4, max_riders=5), seeds)
def test_best_group_matches_enumeration(inst, seed):
    rng = random.Random(seed)
    u = {m: Fraction(rng.randint(0, 20), 2) for m in inst.rider_ids}
    for r in inst.network.routes:
        val, group = best_group(inst, r, u)
        expected = max(social_trip_value(inst, g, r) - sum(u[m] for m in g) for g in feasible_groups(inst))
        assert val == expected
        assert social_trip_value(inst, group, r) - sum(u[m] for m in group) == val


# dual


def test_single_rider_dual():
    inst = single_rider_fixture()
    dual = solve_dual(inst)
    assert dual.utilities == {"1": 8}
    assert set(dual.tolls.values()) == {0}


def test_one_slot_dual_value_and_vertices():
    inst = one_slot_fixture()
    dual = solve_dual(inst)
    assert dual.objective == 5
    x = TripVector([({"1"}, inst.network.routes[0])])
    vertices = sorted(
        (tuple(u[m] for m in inst.rider_ids), tau["e1"]) for u, tau in dual_optimal_vertices(inst, x)
    )
    # u1 + tau >= 5, u2 + tau >= 3 with u1 + u2 + tau = 5: tau in [3, 5], u2 = 0
    assert vertices == [((0, 0), 5), ((2, 0), 3)]


def test_one_slot_payments():
    inst = one_slot_fixture()
    x = TripVector([({"1"}, inst.network.routes[0])])
    payments = payments_from_utilities(x, {"1": Fraction(2), "2": Fraction(0)}, inst)
    assert payments == {"1": 3, "2": 0}
    report = verify_equilibrium(Outcome(x, payments, {"e1": Fraction(3)}), inst)
    assert report.ok and all(report.flags.values())


def test_full_surplus_rider_pays_nothing():
    inst = single_rider_fixture()
    x = TripVector([({"1"}, inst.network.routes[0])])
    assert payments_from_utilities(x, {"1": Fraction(8)}, inst) == {"1": 0}


def test_payments_reject_negative_utilities():
    inst = one_slot_fixture()
    with pytest.raises(ValueError):
        payments_from_utilities(TripVector(), {"1": Fraction(-1), "2": Fraction(0)}, inst)


@given(sp_markets())
def test_strong_duality_with_auction(inst):
    pipe = auction_pipeline(inst)
    dual = solve_dual(inst)
    assert dual.objective == pipe.welfare
    assert all(v >= 0 for v in dual.utilities.values())
    assert all(v >= 0 for v in dual.tolls.values())


@given(sp_markets(max_riders=5))
def test_lazy_and_full_duals_agree(inst):
    assert solve_dual(inst).objective == solve_dual(inst, use_augmented=False).objective


@given(sp_markets(max_riders=5))
def test_route_toll_dual_matches_restricted_primal(inst):
    k = greedy_route_capacities(inst.network)
    _, lam, value = solve_route_toll_dual(inst, k)
    assert value == solve_lp_k(inst, k)[1]
    assert all(v >= 0 for v in lam.values())


# verification


@given(sp_markets())
def test_pipeline_outcomes_are_equilibria(inst):
    found = equilibrium_exists(inst)
    assert found.exists
    report = verify_equilibrium(found.outcome, inst)
    assert all(report.flags[f] for f in VERDICT_FLAGS), report.witnesses
    assert report.ok


def test_toll_on_slack_edge_breaks_market_clearing():
    inst = parallel_fixture()
    found = equilibrium_exists(inst)
    loads = found.outcome.x.edge_loads()
    slack = [e.id for e in inst.network.edges if loads.get(e.id, 0) < e.capacity]
    if not slack:
        inst = single_rider_fixture()
        found = equilibrium_exists(inst)
        slack = ["e1"]
    tolls = dict(found.outcome.tolls)
    tolls[slack[0]] += 1
    report = verify_equilibrium(Outcome(found.outcome.x, found.outcome.payments, tolls), inst)
    assert not report.flags["market_clearing"]
    assert any(w["check"] == "market_clearing" and slack[0] in w["detail"] for w in report.witnesses)


def test_payment_change_breaks_budget_balance():
    inst = one_slot_fixture()
    x = TripVector([({"1"}, inst.network.routes[0])])
    report = verify_equilibrium(Outcome(x, {"1": Fraction(4), "2": Fraction(0)}, {"e1": Fraction(3)}), inst)
    assert not report.flags["budget_balance"]


def test_infeasible_outcome_fails_everything():
    inst = wheatstone_fixture()
    r1, r2, _ = inst.network.routes
    x = TripVector([({"1"}, r1), ({"2"}, r2)])  # e1 carries two cars
    report = verify_equilibrium(Outcome(x, {}, {}), inst)
    assert not any(report.flags.values())


def test_unused_profitable_route_breaks_stability():
    inst = one_slot_fixture()
    report = verify_equilibrium(Outcome(TripVector(), {}, {}), inst)
    assert not report.flags["stability"]


@pytest.mark.parametrize("pricing", ["dual", "free"])
def test_wheatstone_has_no_equilibrium_outcome(pricing):
    inst = wheatstone_fixture()
    dual = solve_dual(inst, use_augmented=True)
    zero = {e.id: Fraction(0) for e in inst.network.edges}
    for x in all_integer_outcomes(inst):
        if pricing == "dual":
            tolls = dual.tolls
            payments = payments_from_utilities(x, dual.utilities, inst)
        else:
            tolls = zero
            payments = {m: Fraction(0) for m in inst.rider_ids}
        assert not verify_equilibrium(Outcome(x, payments, tolls), inst).ok


def test_toll_monotonicity_helper():
    inst = wheatstone_fixture()
    r1, r2, r3 = inst.network.routes
    assert toll_monotonicity_violation(inst.network.routes, {"e1": 0, "e2": 0, "e3": 0, "e4": 0, "e5": 0}) is None
    tolls = {"e1": 0, "e2": 1, "e3": 0, "e4": 0, "e5": 0}
    assert toll_monotonicity_violation(inst.network.routes, tolls) == (r1, r2)
    assert toll_monotonicity_violation(inst.network.routes, tolls, longer=[r3]) is None
    assert route_toll(r1, tolls) == 1
    assert FLAGS[-1] == "toll_monotonicity" and "toll_monotonicity" not in VERDICT_FLAGS


# existence


def test_wheatstone_nonexistence():
    found = equilibrium_exists(wheatstone_fixture())
    assert not found.exists
    assert (found.lp_value, found.ip_value, found.gap) == (11, 10, 1)


@given(seeds)
def test_single_route_markets_have_equilibria(seed):
    rng = random.Random(seed)
    net = Network(["o", "d"], "o", "d", [Edge("e1", "o", "d", rng.randint(1, 3), Fraction(rng.randint(0, 4)))])
    inst = random_market(rng, net, 5, heterogeneous=rng.random() < 0.5)
    found = equilibrium_exists(inst)
    assert found.exists and found.lp_value == found.ip_value == brute_force_ip(inst)[1]
    assert verify_equilibrium(found.outcome, inst).ok


def test_heterogeneous_market_uses_enumeration():
    net = Network(["o", "d"], "o", "d", [Edge("e1", "o", "d", 1, Fraction(1))])
    riders = [RiderPreferences("1", 9, 1, (0, 0)), RiderPreferences("2", 6, 1, (0, 2))]
    inst = MarketInstance(net, riders, Fraction(0), 2)
    found = equilibrium_exists(inst)
    assert found.exists and found.method == "enumeration"
    assert verify_equilibrium(found.outcome, inst).ok


def test_large_non_series_parallel_market_is_guarded():
    from carpool.oracle import wheatstone_network

    riders = [RiderPreferences(str(i), 7, 1, (0, 0)) for i in range(9)]
    with pytest.raises(EnumerationGuard):
        equilibrium_exists(MarketInstance(wheatstone_network(), riders, Fraction(0), 2))


def test_large_series_parallel_market_goes_through_the_auction():
    net = Network(["o", "d"], "o", "d", [Edge("a", "o", "d", 3, Fraction(1)), Edge("b", "o", "d", 2, Fraction(2))])
    riders = [RiderPreferences(str(i), 4 + i, Fraction(1, 2), (0, 1, 2)) for i in range(10)]
    inst = MarketInstance(net, riders, Fraction(1, 2), 3)
    found = equilibrium_exists(inst)
    assert found.exists and found.method == "auction"
    assert found.lp_value == found.ip_value
    assert verify_equilibrium(found.outcome, inst).ok
