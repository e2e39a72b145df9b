"""Random markets for property tests and benchmarks."""
from __future__ import annotations

import random
from fractions import Fraction

from .network import Edge, Network, NetworkError
from .preferences import MarketInstance, RiderPreferences

HALVES = [Fraction(k, 2) for k in range(0, 9)]


def random_sp_network(rng: random.Random, max_edges: int = 8) -> Network:
    """Grow o->d by random series subdivisions and parallel duplications."""
    target = rng.randint(1, max_edges)
    pairs = [("o", "d")]
    fresh = 0
    while len(pairs) < target:
        i = rng.randrange(len(pairs))
        a, b = pairs[i]
        if rng.random() < 0.5:
            fresh += 1
            n = f"v{fresh}"
            pairs[i : i + 1] = [(a, n), (n, b)]
        else:
            pairs.insert(i + 1, (a, b))
    edges = [
        Edge(
            f"e{k + 1}",
            a,
            b,
            rng.randint(1, 3),
            rng.choice([Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(2), Fraction(3)]),
        )
        for k, (a, b) in enumerate(pairs)
    ]
    nodes = ["o"] + [f"v{k}" for k in range(1, fresh + 1)] + ["d"]
    return Network(nodes, "o", "d", edges)


def random_dag_network(rng: random.Random, n_nodes: int = 5, n_edges: int = 7) -> Network | None:
    """Random acyclic two-terminal network (may be non-series-parallel).

    Returns None when the draw leaves an edge off every o-d path.
    """
    names = ["o"] + [f"v{k}" for k in range(1, n_nodes - 1)] + ["d"]
    edges = []
    for k in range(n_edges):
        i = rng.randrange(n_nodes - 1)
        j = rng.randrange(i + 1, n_nodes)
        edges.append(Edge(f"e{k + 1}", names[i], names[j], rng.randint(1, 3), Fraction(rng.randint(0, 4))))
    try:
        return Network(names, "o", "d", edges)
    except NetworkError:
        return None


def random_gamma(rng: random.Random, car_capacity: int) -> tuple[Fraction, ...]:
    """gamma(1) = 0 with non-decreasing marginal increments."""
    steps = sorted(rng.choice([Fraction(0), Fraction(1, 2), Fraction(1)]) for _ in range(car_capacity - 1))
    gamma = [Fraction(0)]
    for s in steps:
        gamma.append(gamma[-1] + s)
    return tuple(gamma)


def random_market(
    rng: random.Random,
    network: Network,
    max_riders: int = 6,
    heterogeneous: bool = False,
    car_capacity: int | None = None,
) -> MarketInstance:
    A = car_capacity if car_capacity is not None else rng.choice([1, 2, 3])
    n = rng.randint(1, max_riders)
    shared = random_gamma(rng, A)
    riders = [
        RiderPreferences(
            str(i + 1),
            Fraction(rng.randint(10, 40), 2),
            rng.choice(HALVES[:5]),
            random_gamma(rng, A) if heterogeneous else shared,
        )
        for i in range(n)
    ]
    delta = rng.choice([Fraction(0), Fraction(1, 2), Fraction(1)])
    return MarketInstance(network, riders, delta, A)


def random_sp_market(rng: random.Random, max_edges: int = 8, max_riders: int = 6) -> MarketInstance:
    """Series-parallel network, homogeneous disutility, |M| <= max_riders."""
    return random_market(rng, random_sp_network(rng, max_edges), max_riders)
