"""Two-terminal road networks: routes, series-parallel structure, greedy capacities."""
from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterator, Sequence, Union

DEFAULT_MAX_ROUTES = 10_000


class NetworkError(ValueError):
    """Raised for malformed networks."""


class RouteLimitExceeded(NetworkError):
    def __init__(self, limit: int):
        super().__init__(
            f"route enumeration exceeded the cap of {limit} routes "
            "(raise it with --max-routes or CARPOOL_MAX_ROUTES)"
        )
        self.limit = limit


def max_routes_from_env() -> int:
    raw = os.environ.get("CARPOOL_MAX_ROUTES")
    if not raw:
        return DEFAULT_MAX_ROUTES
    try:
        value = int(raw)
    except ValueError as exc:
        raise NetworkError(f"CARPOOL_MAX_ROUTES must be an integer, got {raw!r}") from exc
    if value < 1:
        raise NetworkError("CARPOOL_MAX_ROUTES must be positive")
    return value


@dataclass(frozen=True)
class Edge:
    id: str
    tail: str
    head: str
    capacity: int
    travel_time: Fraction

    def __post_init__(self):
        if isinstance(self.capacity, bool) or not isinstance(self.capacity, int):
            raise NetworkError(f"edge {self.id}: capacity must be an integer")
        if self.capacity < 1:
            raise NetworkError(f"edge {self.id}: capacity must be >= 1")
        object.__setattr__(self, "travel_time", Fraction(self.travel_time))
        if self.travel_time < 0:
            raise NetworkError(f"edge {self.id}: travel_time must be >= 0")


@dataclass(frozen=True)
class Route:
    """An origin-destination path, identified by its edge ids in path order.

    ``key`` holds the edge declaration indices and is the lexicographic
    sort key used for every deterministic tie-break on routes.
    """

    edges: tuple[str, ...]
    travel_time: Fraction
    key: tuple[int, ...] = field(compare=False, repr=False)

    @property
    def name(self) -> str:
        return "-".join(self.edges)

    def __lt__(self, other: "Route") -> bool:
        return self.key < other.key


class Network:
    """Directed two-terminal network with integer capacities.

    Every edge must lie on some origin-destination route and the graph
    must be acyclic; both are checked at construction.
    """

    def __init__(
        self,
        nodes: Sequence[str],
        origin: str,
        destination: str,
        edges: Sequence[Edge],
        max_routes: int | None = None,
    ):
        self.nodes = tuple(nodes)
        self.origin = origin
        self.destination = destination
        self.edges = tuple(edges)
        self.max_routes = max_routes if max_routes is not None else max_routes_from_env()
        self._validate()
        self.edge_index = {e.id: i for i, e in enumerate(self.edges)}
        self.edge_by_id = {e.id: e for e in self.edges}

    def _validate(self) -> None:
        node_set = set(self.nodes)
        if len(node_set) != len(self.nodes):
            raise NetworkError("duplicate node identifiers")
        if self.origin not in node_set or self.destination not in node_set:
            raise NetworkError("origin and destination must be listed in nodes")
        if self.origin == self.destination:
            raise NetworkError("origin and destination must differ")
        ids = [e.id for e in self.edges]
        if len(set(ids)) != len(ids):
            raise NetworkError("duplicate edge identifiers")
        for e in self.edges:
            if e.tail not in node_set or e.head not in node_set:
                raise NetworkError(f"edge {e.id} references an unknown node")
            if e.tail == e.head:
                raise NetworkError(f"edge {e.id} is a self-loop")

        forward = _reachable(self.origin, self.edges, reverse=False)
        backward = _reachable(self.destination, self.edges, reverse=True)
        stranded = [e.id for e in self.edges if e.tail not in forward or e.head not in backward]
        if stranded:
            raise NetworkError(
                "edges not on any origin-destination route: " + ", ".join(stranded)
            )
        if _has_cycle(self.nodes, self.edges):
            raise NetworkError("network contains a directed cycle")

    def out_edges(self, node: str) -> list[Edge]:
        return self._out[node]

    @cached_property
    def _out(self) -> dict[str, list[Edge]]:
        out: dict[str, list[Edge]] = {n: [] for n in self.nodes}
        for e in self.edges:
            out[e.tail].append(e)
        return out

    @cached_property
    def routes(self) -> tuple[Route, ...]:
        return tuple(enumerate_routes(self))

    def route_edges(self, route: Route) -> list[Edge]:
        return [self.edge_by_id[eid] for eid in route.edges]

    def make_route(self, edge_ids: Sequence[str]) -> Route:
        """Build a Route from edge ids, checking it is an o-d path."""
        node = self.origin
        for eid in edge_ids:
            if eid not in self.edge_by_id:
                raise NetworkError(f"unknown edge {eid!r} in route")
            e = self.edge_by_id[eid]
            if e.tail != node:
                raise NetworkError(f"edges {list(edge_ids)} do not form a path")
            node = e.head
        if node != self.destination or not edge_ids:
            raise NetworkError(f"edges {list(edge_ids)} do not reach the destination")
        return Route(
            tuple(edge_ids),
            sum((self.edge_by_id[eid].travel_time for eid in edge_ids), Fraction(0)),
            tuple(self.edge_index[eid] for eid in edge_ids),
        )

    def __repr__(self) -> str:
        return f"Network({len(self.nodes)} nodes, {len(self.edges)} edges)"


def _reachable(start: str, edges: Sequence[Edge], reverse: bool) -> set[str]:
    adj: dict[str, list[str]] = {}
    for e in edges:
        a, b = (e.head, e.tail) if reverse else (e.tail, e.head)
        adj.setdefault(a, []).append(b)
    seen = {start}
    stack = [start]
    while stack:
        for nxt in adj.get(stack.pop(), ()):
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return seen


def _has_cycle(nodes: Sequence[str], edges: Sequence[Edge]) -> bool:
    indeg = {n: 0 for n in nodes}
    adj: dict[str, list[str]] = {n: [] for n in nodes}
    for e in edges:
        adj[e.tail].append(e.head)
        indeg[e.head] += 1
    queue = deque(n for n in nodes if indeg[n] == 0)
    visited = 0
    while queue:
        n = queue.popleft()
        visited += 1
        for m in adj[n]:
            indeg[m] -= 1
            if indeg[m] == 0:
                queue.append(m)
    return visited != len(nodes)


def enumerate_routes(network: Network, max_routes: int | None = None) -> list[Route]:
    """All simple origin-destination paths, in lexicographic edge-index order."""
    limit = max_routes if max_routes is not None else network.max_routes
    out: list[Route] = []
    path: list[Edge] = []
    on_path = {network.origin}

    def visit(node: str) -> None:
        if node == network.destination:
            if len(out) >= limit:
                raise RouteLimitExceeded(limit)
            out.append(
                Route(
                    tuple(e.id for e in path),
                    sum((e.travel_time for e in path), Fraction(0)),
                    tuple(network.edge_index[e.id] for e in path),
                )
            )
            return
        for e in network.out_edges(node):
            if e.head in on_path:
                continue
            path.append(e)
            on_path.add(e.head)
            visit(e.head)
            on_path.discard(e.head)
            path.pop()

    visit(network.origin)
    return out


# --------------------------------------------------------------------------
# Series-parallel decomposition


@dataclass(frozen=True)
class Leaf:
    edge: str

    def edges(self) -> Iterator[str]:
        yield self.edge


@dataclass(frozen=True)
class Series:
    children: tuple["SPTree", ...]

    def edges(self) -> Iterator[str]:
        for c in self.children:
            yield from c.edges()


@dataclass(frozen=True)
class Parallel:
    children: tuple["SPTree", ...]

    def edges(self) -> Iterator[str]:
        for c in self.children:
            yield from c.edges()


SPTree = Union[Leaf, Series, Parallel]


class NotSeriesParallel(NetworkError):
    """The network has no series-parallel decomposition.

    ``witness`` holds the original edge ids of the irreducible remainder.
    """

    def __init__(self, witness: frozenset[str]):
        super().__init__("network is not series-parallel; irreducible edges: "
                         + ", ".join(sorted(witness)))
        self.witness = witness


def _combine(kind, parts: Sequence[SPTree]) -> SPTree:
    flat: list[SPTree] = []
    for p in parts:
        if isinstance(p, kind):
            flat.extend(p.children)
        else:
            flat.append(p)
    return kind(tuple(flat))


def _min_index(tree: SPTree, index: dict[str, int]) -> int:
    return min(index[e] for e in tree.edges())


def decompose_series_parallel(network: Network) -> SPTree:
    """Reduce the network by series and parallel contractions.

    Returns the decomposition tree, or raises NotSeriesParallel carrying
    the edges that could not be reduced.
    """
    index = network.edge_index
    # live edges: id -> (tail, head, tree)
    live: dict[int, tuple[str, str, SPTree]] = {
        i: (e.tail, e.head, Leaf(e.id)) for i, e in enumerate(network.edges)
    }
    next_id = len(live)
    terminals = {network.origin, network.destination}

    changed = True
    while changed:
        changed = False
        # parallel reductions
        by_ends: dict[tuple[str, str], list[int]] = {}
        for k, (a, b, _) in live.items():
            by_ends.setdefault((a, b), []).append(k)
        for (a, b), ks in by_ends.items():
            if len(ks) > 1:
                parts = sorted((live.pop(k)[2] for k in ks), key=lambda t: _min_index(t, index))
                live[next_id] = (a, b, _combine(Parallel, parts))
                next_id += 1
                changed = True
        if changed:
            continue
        # series reductions
        ins: dict[str, list[int]] = {}
        outs: dict[str, list[int]] = {}
        for k, (a, b, _) in live.items():
            outs.setdefault(a, []).append(k)
            ins.setdefault(b, []).append(k)
        for node in sorted(set(ins) | set(outs)):
            if node in terminals:
                continue
            if len(ins.get(node, ())) == 1 and len(outs.get(node, ())) == 1:
                k_in, k_out = ins[node][0], outs[node][0]
                a, _, t1 = live.pop(k_in)
                _, b, t2 = live.pop(k_out)
                live[next_id] = (a, b, _combine(Series, [t1, t2]))
                next_id += 1
                changed = True
                break

    if len(live) == 1:
        (a, b, tree), = live.values()
        if (a, b) == (network.origin, network.destination):
            return tree
    witness = frozenset(eid for _, _, t in live.values() for eid in t.edges())
    raise NotSeriesParallel(witness)


def is_series_parallel(network: Network) -> bool:
    try:
        decompose_series_parallel(network)
    except NotSeriesParallel:
        return False
    return True


# --------------------------------------------------------------------------
# Capacities


class RouteCapacityVector:
    """Integer capacities per route; routes absent from the map have zero."""

    def __init__(self, capacities: dict[Route, int]):
        self._caps = {r: k for r, k in sorted(capacities.items(), key=lambda kv: kv[0].key) if k > 0}

    def __getitem__(self, route: Route) -> int:
        return self._caps.get(route, 0)

    def items(self):
        return self._caps.items()

    @property
    def support(self) -> tuple[Route, ...]:
        return tuple(self._caps)

    @property
    def total(self) -> int:
        return sum(self._caps.values())

    def edge_loads(self) -> dict[str, int]:
        loads: dict[str, int] = {}
        for r, k in self._caps.items():
            for eid in r.edges:
                loads[eid] = loads.get(eid, 0) + k
        return loads

    def __eq__(self, other) -> bool:
        return isinstance(other, RouteCapacityVector) and self._caps == other._caps

    def __repr__(self) -> str:
        inner = ", ".join(f"{r.name}: {k}" for r, k in self._caps.items())
        return f"RouteCapacityVector({{{inner}}})"


def greedy_route_capacities(network: Network) -> RouteCapacityVector:
    """Repeatedly saturate a shortest route among edges with residual capacity.

    Shortest-route ties go to the lexicographically smallest edge-index
    sequence.
    """
    residual = {e.id: e.capacity for e in network.edges}
    ordered = sorted(network.routes, key=lambda r: (r.travel_time, r.key))
    caps: dict[Route, int] = {}
    while True:
        pick = next((r for r in ordered if all(residual[e] > 0 for e in r.edges)), None)
        if pick is None:
            break
        amount = min(residual[e] for e in pick.edges)
        caps[pick] = caps.get(pick, 0) + amount
        for e in pick.edges:
            residual[e] -= amount
    return RouteCapacityVector(caps)


def network_capacity(network: Network) -> int:
    """Maximum origin-destination flow (BFS augmenting paths)."""
    # residual arcs as (head, capacity, reverse arc index)
    graph: dict[str, list[list]] = {n: [] for n in network.nodes}
    for e in network.edges:
        fwd = [e.head, e.capacity, None]
        rev = [e.tail, 0, None]
        fwd[2] = len(graph[e.head])
        rev[2] = len(graph[e.tail])
        graph[e.tail].append(fwd)
        graph[e.head].append(rev)

    flow = 0
    while True:
        parent: dict[str, tuple[str, int]] = {}
        queue = deque([network.origin])
        seen = {network.origin}
        while queue and network.destination not in seen:
            u = queue.popleft()
            for i, (v, cap, _) in enumerate(graph[u]):
                if cap > 0 and v not in seen:
                    seen.add(v)
                    parent[v] = (u, i)
                    queue.append(v)
        if network.destination not in seen:
            return flow
        push = None
        v = network.destination
        while v != network.origin:
            u, i = parent[v]
            cap = graph[u][i][1]
            push = cap if push is None else min(push, cap)
            v = u
        v = network.destination
        while v != network.origin:
            u, i = parent[v]
            arc = graph[u][i]
            arc[1] -= push
            graph[v][arc[2]][1] += push
            v = u
        flow += push
