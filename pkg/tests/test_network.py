from fractions import Fraction

import networkx as nx
import pytest
from hypothesis import given

from carpool.network import (
    Edge,
    Leaf,
    Network,
    NetworkError,
    NotSeriesParallel,
    Parallel,
    RouteLimitExceeded,
    Series,
    decompose_series_parallel,
    enumerate_routes,
    greedy_route_capacities,
    is_series_parallel,
    network_capacity,
)
from carpool.oracle import opposite_direction_pair, wheatstone_network

from conftest import dag_networks, sp_networks


def single_edge(capacity=5, t=1):
    return Network(["o", "d"], "o", "d", [Edge("e1", "o", "d", capacity, Fraction(t))])


def parallel_chains():
    edges = [
        Edge("a1", "o", "x", 1, Fraction(1)),
        Edge("a2", "x", "d", 1, Fraction(1)),
        Edge("b1", "o", "y", 1, Fraction(2)),
        Edge("b2", "y", "d", 1, Fraction(2)),
    ]
    return Network(["o", "x", "y", "d"], "o", "d", edges)


def nx_routes(network):
    g = nx.MultiDiGraph()
    for e in network.edges:
        g.add_edge(e.tail, e.head, key=e.id)
    paths = nx.all_simple_edge_paths(g, network.origin, network.destination)
    return sorted(tuple(k for _, _, k in p) for p in paths)


def nx_max_flow(network):
    g = nx.DiGraph()
    for e in network.edges:
        cap = g.edges[e.tail, e.head]["capacity"] if g.has_edge(e.tail, e.head) else 0
        g.add_edge(e.tail, e.head, capacity=cap + e.capacity)
    return nx.maximum_flow_value(g, network.origin, network.destination)


# routes


def test_wheatstone_routes():
    routes = wheatstone_network().routes
    assert [r.edges for r in routes] == [("e1", "e2"), ("e1", "e5", "e4"), ("e3", "e4")]
    assert [r.travel_time for r in routes] == [4, 2, 4]


def test_single_edge_route():
    (r,) = single_edge(t=1).routes
    assert r.edges == ("e1",) and r.travel_time == 1


def test_three_parallel_edges():
    edges = [Edge(f"e{i}", "o", "d", 1, Fraction(i)) for i in (1, 2, 3)]
    net = Network(["o", "d"], "o", "d", edges)
    assert len(net.routes) == 3
    assert sorted(r.edges for r in net.routes) == nx_routes(net)


@given(dag_networks())
def test_routes_match_networkx(net):
    routes = net.routes
    assert sorted(r.edges for r in routes) == nx_routes(net)
    assert [r.key for r in routes] == sorted(r.key for r in routes)
    for r in routes:
        assert r.travel_time == sum(net.edge_by_id[e].travel_time for e in r.edges)


def test_route_cap():
    edges = [Edge(f"e{i}", "o", "d", 1, Fraction(1)) for i in range(5)]
    net = Network(["o", "d"], "o", "d", edges, max_routes=3)
    with pytest.raises(RouteLimitExceeded) as info:
        net.routes
    assert info.value.limit == 3
    assert len(enumerate_routes(net, max_routes=5)) == 5


def test_route_cap_from_environment(monkeypatch):
    monkeypatch.setenv("CARPOOL_MAX_ROUTES", "2")
    edges = [Edge(f"e{i}", "o", "d", 1, Fraction(1)) for i in range(3)]
    with pytest.raises(RouteLimitExceeded):
        Network(["o", "d"], "o", "d", edges).routes


def test_make_route_checks_path():
    net = wheatstone_network()
    assert net.make_route(["e1", "e5", "e4"]).travel_time == 2
    for bad in (["e1", "e4"], ["e1"], ["zz"], []):
        with pytest.raises(NetworkError):
            net.make_route(bad)


# validation


@pytest.mark.parametrize(
    "nodes, edges, message",
    [
        (["o", "d", "x"], [("e1", "o", "d"), ("e2", "o", "x")], "not on any"),
        (["o", "d", "x"], [("e1", "o", "x"), ("e2", "x", "o"), ("e3", "x", "d")], "cycle"),
        (["o", "d"], [("e1", "o", "d"), ("e1", "o", "d")], "duplicate edge"),
        (["o", "d"], [("e1", "o", "q")], "unknown node"),
        (["o", "d"], [("e1", "o", "o"), ("e2", "o", "d")], "self-loop"),
    ],
)
def test_network_rejects(nodes, edges, message):
    with pytest.raises(NetworkError, match=message):
        Network(nodes, "o", "d", [Edge(i, a, b, 1, Fraction(1)) for i, a, b in edges])


def test_edge_rejects_bad_capacity_and_time():
    with pytest.raises(NetworkError):
        Edge("e", "o", "d", 0, Fraction(1))
    with pytest.raises(NetworkError):
        Edge("e", "o", "d", Fraction(3, 2), Fraction(1))
    with pytest.raises(NetworkError):
        Edge("e", "o", "d", 1, Fraction(-1))


# series-parallel structure


def test_wheatstone_is_not_series_parallel():
    with pytest.raises(NotSeriesParallel) as info:
        decompose_series_parallel(wheatstone_network())
    assert "e5" in info.value.witness
    assert not is_series_parallel(wheatstone_network())


def test_single_edge_is_leaf():
    assert decompose_series_parallel(single_edge()) == Leaf("e1")


def test_parallel_chains_decomposition():
    tree = decompose_series_parallel(parallel_chains())
    assert tree == Parallel((Series((Leaf("a1"), Leaf("a2"))), Series((Leaf("b1"), Leaf("b2")))))
    assert opposite_direction_pair(parallel_chains()) is None


def test_wheatstone_has_opposite_direction_pair():
    eid, forward, backward = opposite_direction_pair(wheatstone_network())
    assert eid == "e5"
    assert ("e5", 1) in forward and ("e5", -1) in backward


@given(dag_networks())
def test_decomposition_agrees_with_route_direction_scan(net):
    assert is_series_parallel(net) == (opposite_direction_pair(net) is None)


@given(sp_networks())
def test_generated_networks_are_series_parallel(net):
    tree = decompose_series_parallel(net)
    assert sorted(tree.edges()) == sorted(e.id for e in net.edges)


# capacities


def test_greedy_parallel_edges():
    net = Network(
        ["o", "d"], "o", "d",
        [Edge("short", "o", "d", 2, Fraction(1)), Edge("long", "o", "d", 1, Fraction(2))],
    )
    k = greedy_route_capacities(net)
    assert {r.edges: c for r, c in k.items()} == {("short",): 2, ("long",): 1}


def test_greedy_series_chain_bottleneck():
    net = Network(
        ["o", "x", "d"], "o", "d",
        [Edge("e1", "o", "x", 3, Fraction(1)), Edge("e2", "x", "d", 2, Fraction(1))],
    )
    k = greedy_route_capacities(net)
    assert {r.edges: c for r, c in k.items()} == {("e1", "e2"): 2}


def test_wheatstone_greedy_gap():
    net = wheatstone_network()
    k = greedy_route_capacities(net)
    assert {r.edges: c for r, c in k.items()} == {("e1", "e5", "e4"): 1}
    assert k.total == 1
    assert network_capacity(net) == 2 == nx_max_flow(net)


def test_single_edge_capacity():
    assert network_capacity(single_edge(capacity=5)) == 5


@given(sp_networks())
def test_greedy_reaches_max_flow_on_series_parallel(net):
    k = greedy_route_capacities(net)
    assert k.total == network_capacity(net) == nx_max_flow(net)
    loads = k.edge_loads()
    assert all(loads.get(e.id, 0) <= e.capacity for e in net.edges)


@given(dag_networks())
def test_max_flow_matches_networkx(net):
    assert network_capacity(net) == nx_max_flow(net)
    assert greedy_route_capacities(net).total <= network_capacity(net)
