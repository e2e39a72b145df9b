"""Desk-scale ground truth: exhaustive integer optimum, exact LP relaxation,
capacity reassignment onto greedy routes, dual-vertex enumeration and
canonical fixtures.
"""
from __future__ import annotations

from collections import deque
from fractions import Fraction
from functools import lru_cache
from typing import Iterable

from .auction import TripVector
from .network import (
    Edge,
    Network,
    NotSeriesParallel,
    Route,
    RouteCapacityVector,
    is_series_parallel,
)
from .preferences import (
    EnumerationGuard,
    MarketInstance,
    RiderPreferences,
    feasible_groups,
    social_trip_value,
)
from .simplex import OPTIMAL, LPError, solve_lp

MAX_BRUTE_RIDERS = 8
MAX_BRUTE_ROUTES = 32

FractionalTripVector = dict  # (frozenset group, Route) -> Fraction


# --------------------------------------------------------------------------
# Fixtures


def wheatstone_network() -> Network:
    edges = [
        Edge("e1", "o", "a", 1, Fraction(1)),
        Edge("e2", "a", "d", 1, Fraction(3)),
        Edge("e3", "o", "b", 1, Fraction(3)),
        Edge("e4", "b", "d", 1, Fraction(1)),
        Edge("e5", "a", "b", 4, Fraction(0)),
    ]
    return Network(["o", "a", "b", "d"], "o", "d", edges)


def wheatstone_fixture() -> MarketInstance:
    """Bridge network with three identical riders that has no equilibrium."""
    riders = [RiderPreferences(str(i), 7, 1, (0, 0)) for i in (1, 2, 3)]
    return MarketInstance(wheatstone_network(), riders, Fraction(0), 2)


def single_rider_fixture() -> MarketInstance:
    net = Network(["o", "d"], "o", "d", [Edge("e1", "o", "d", 5, Fraction(1))])
    return MarketInstance(net, [RiderPreferences("1", 10, 2, (0,))], Fraction(0), 1)


def one_slot_fixture() -> MarketInstance:
    """Two solo riders worth 5 and 3 competing for one unit of capacity."""
    net = Network(["o", "d"], "o", "d", [Edge("e1", "o", "d", 1, Fraction(1))])
    riders = [RiderPreferences("1", 5, 0, (0,)), RiderPreferences("2", 3, 0, (0,))]
    return MarketInstance(net, riders, Fraction(0), 1)


def parallel_fixture() -> MarketInstance:
    edges = [
        Edge("fast", "o", "d", 2, Fraction(1)),
        Edge("slow", "o", "d", 1, Fraction(2)),
    ]
    net = Network(["o", "d"], "o", "d", edges)
    gamma = (Fraction(0), Fraction(1, 2))
    riders = [
        RiderPreferences("1", 9, 1, gamma),
        RiderPreferences("2", 8, 2, gamma),
        RiderPreferences("3", 6, Fraction(1, 2), gamma),
        RiderPreferences("4", 5, 1, gamma),
    ]
    return MarketInstance(net, riders, Fraction(1, 2), 2)


# --------------------------------------------------------------------------
# Group sensitivity


def group_sensitivity(instance: MarketInstance, group: Iterable) -> tuple[Fraction, Fraction]:
    """(z, g) with V_r(b) = z - g * t_r."""
    group = frozenset(group)
    size = len(group)
    z = sum((instance.by_id[m].alpha for m in group), Fraction(0))
    g = sum((instance.by_id[m].beta + instance.by_id[m].gamma[size - 1] for m in group), Fraction(0))
    return z, g + instance.delta * size


# --------------------------------------------------------------------------
# Series-parallel predicate on route pairs


def undirected_routes(network: Network) -> list[tuple[tuple[str, int], ...]]:
    """Simple origin-destination paths of the underlying undirected graph.

    Each path is a tuple of (edge id, +1 forward / -1 backward).
    """
    adj: dict[str, list[tuple[Edge, str, int]]] = {n: [] for n in network.nodes}
    for e in network.edges:
        adj[e.tail].append((e, e.head, 1))
        adj[e.head].append((e, e.tail, -1))
    out: list[tuple[tuple[str, int], ...]] = []
    path: list[tuple[str, int]] = []
    on_path = {network.origin}

    def visit(node: str) -> None:
        if node == network.destination:
            out.append(tuple(path))
            return
        for e, nxt, sign in adj[node]:
            if nxt in on_path:
                continue
            on_path.add(nxt)
            path.append((e.id, sign))
            visit(nxt)
            path.pop()
            on_path.discard(nxt)

    visit(network.origin)
    return out


def opposite_direction_pair(network: Network) -> tuple | None:
    """Two undirected routes crossing a common edge in opposite directions, if any."""
    used: dict[str, dict[int, tuple]] = {}
    for p in undirected_routes(network):
        for eid, sign in p:
            used.setdefault(eid, {}).setdefault(sign, p)
    for eid, dirs in used.items():
        if 1 in dirs and -1 in dirs:
            return eid, dirs[1], dirs[-1]
    return None


# --------------------------------------------------------------------------
# Integer optimum


def _check_guards(instance: MarketInstance) -> None:
    if len(instance.riders) > MAX_BRUTE_RIDERS:
        raise EnumerationGuard("brute-force rider count", len(instance.riders), MAX_BRUTE_RIDERS)
    n_routes = len(instance.network.routes)
    if n_routes > MAX_BRUTE_ROUTES:
        raise EnumerationGuard("brute-force route count", n_routes, MAX_BRUTE_ROUTES)


def _candidate_trips(instance: MarketInstance, routes=None) -> list[tuple[frozenset, Route, Fraction]]:
    routes = instance.network.routes if routes is None else routes
    out = []
    for b in feasible_groups(instance):
        for r in routes:
            v = social_trip_value(instance, b, r)
            if v > 0:
                out.append((b, r, v))
    return out


def brute_force_ip(instance: MarketInstance) -> tuple[TripVector, Fraction]:
    """Exact integer optimum by memoised search over (undecided riders, residual capacities).

    The lowest-index undecided rider either joins a trip (groups in size
    then rider order, routes in key order) or stays home; the first
    optimum met in that order is returned.
    """
    _check_guards(instance)
    riders = instance.rider_ids
    n = len(riders)
    network = instance.network
    edge_pos = {e.id: i for i, e in enumerate(network.edges)}
    positive = _candidate_trips(instance)
    by_leader: dict[int, list] = {i: [] for i in range(n)}
    for b, r, v in positive:
        mask = sum(1 << instance.index[m] for m in b)
        leader = (mask & -mask).bit_length() - 1
        by_leader[leader].append((mask, tuple(edge_pos[e] for e in r.edges), v, b, r))

    @lru_cache(maxsize=None)
    def best(mask: int, residual: tuple[int, ...]) -> tuple[Fraction, tuple]:
        if mask == 0:
            return Fraction(0), ()
        i = (mask & -mask).bit_length() - 1
        top, choice = best(mask & ~(1 << i), residual)
        for tmask, edges, v, b, r in by_leader[i]:
            if tmask & ~mask:
                continue
            if any(residual[e] == 0 for e in edges):
                continue
            res = list(residual)
            for e in edges:
                res[e] -= 1
            sub, trips = best(mask & ~tmask, tuple(res))
            if sub + v > top:
                top, choice = sub + v, ((b, r),) + trips
        return top, choice

    value, trips = best((1 << n) - 1, tuple(e.capacity for e in network.edges))
    best.cache_clear()
    return TripVector(trips), value


def brute_force_ip_naive(instance: MarketInstance) -> Fraction:
    """Independent check: depth-first search over multisets of candidate trips."""
    _check_guards(instance)
    cands = _candidate_trips(instance)
    residual = {e.id: e.capacity for e in instance.network.edges}
    taken: set = set()
    best = [Fraction(0)]

    def dfs(start: int, value: Fraction) -> None:
        if value > best[0]:
            best[0] = value
        for j in range(start, len(cands)):
            b, r, v = cands[j]
            if taken & b or any(residual[e] == 0 for e in r.edges):
                continue
            taken.update(b)
            for e in r.edges:
                residual[e] -= 1
            dfs(j + 1, value + v)
            for e in r.edges:
                residual[e] += 1
            taken.difference_update(b)

    dfs(0, Fraction(0))
    return best[0]


# --------------------------------------------------------------------------
# LP relaxation


def _trip_lp(instance: MarketInstance, cols, route_rows):
    riders = instance.rider_ids
    A, b = [], []
    for m in riders:
        A.append([1 if m in g else 0 for g, _ in cols])
        b.append(1)
    for members, cap in route_rows:
        A.append([1 if r in members else 0 for _, r in cols])
        b.append(cap)
    return A, b


def lp_columns(instance: MarketInstance, routes=None, positive_only: bool = True):
    routes = instance.network.routes if routes is None else routes
    cols = []
    for g in feasible_groups(instance):
        for r in routes:
            if not positive_only or social_trip_value(instance, g, r) > 0:
                cols.append((g, r))
    return cols


def solve_lp_relaxation(instance: MarketInstance) -> tuple[FractionalTripVector, Fraction]:
    """Exact LP relaxation of the trip organisation problem.

    Columns with non-positive trip value are left out; they cannot raise
    the optimum.
    """
    _check_guards(instance)
    cols = lp_columns(instance)
    network = instance.network
    edge_rows = [
        ({r for _, r in cols if e.id in r.edges}, e.capacity) for e in network.edges
    ]
    A, b = _trip_lp(instance, cols, edge_rows)
    c = [social_trip_value(instance, g, r) for g, r in cols]
    if not cols:
        return {}, Fraction(0)
    res = solve_lp(c, A_ub=A, b_ub=b, maximize=True)
    if res.status != OPTIMAL:
        raise LPError(f"LP relaxation is {res.status}")
    x = {col: v for col, v in zip(cols, res.x) if v}
    return x, res.objective


def solve_lp_k(instance: MarketInstance, capacities: RouteCapacityVector) -> tuple[FractionalTripVector, Fraction]:
    """LP restricted to greedy routes with one capacity row per route."""
    routes = capacities.support
    cols = lp_columns(instance, routes)
    if not cols:
        return {}, Fraction(0)
    route_rows = [({r}, k) for r, k in capacities.items()]
    A, b = _trip_lp(instance, cols, route_rows)
    c = [social_trip_value(instance, g, r) for g, r in cols]
    res = solve_lp(c, A_ub=A, b_ub=b, maximize=True)
    if res.status != OPTIMAL:
        raise LPError(f"route-capacity LP is {res.status}")
    return {col: v for col, v in zip(cols, res.x) if v}, res.objective


def fractional_welfare(x: FractionalTripVector, instance: MarketInstance) -> Fraction:
    return sum((w * social_trip_value(instance, g, r) for (g, r), w in x.items()), Fraction(0))


def lp_feasibility_violations(x: FractionalTripVector, instance: MarketInstance) -> list[str]:
    problems = []
    per_rider: dict = {}
    per_edge: dict[str, Fraction] = {}
    for (g, r), w in x.items():
        if w < 0 or w > 1:
            problems.append(f"weight {w} outside [0, 1]")
        if not 1 <= len(g) <= instance.car_capacity:
            problems.append("group size outside 1..A")
        for m in g:
            per_rider[m] = per_rider.get(m, Fraction(0)) + w
        for e in r.edges:
            per_edge[e] = per_edge.get(e, Fraction(0)) + w
    problems += [f"rider {m} has total weight {w}" for m, w in per_rider.items() if w > 1]
    problems += [
        f"edge {e} load {w} exceeds capacity"
        for e, w in per_edge.items()
        if w > instance.network.edge_by_id[e].capacity
    ]
    return problems


def lp_k_violations(x: FractionalTripVector, capacities: RouteCapacityVector, instance: MarketInstance) -> list[str]:
    problems = []
    per_rider: dict = {}
    per_route: dict[Route, Fraction] = {}
    for (g, r), w in x.items():
        if w < 0:
            problems.append(f"negative weight on {r.name}")
        if capacities[r] == 0 and w != 0:
            problems.append(f"weight on route {r.name} outside the greedy support")
        for m in g:
            per_rider[m] = per_rider.get(m, Fraction(0)) + w
        per_route[r] = per_route.get(r, Fraction(0)) + w
    problems += [f"rider {m} has total weight {w}" for m, w in per_rider.items() if w > 1]
    problems += [
        f"route {r.name} load {w} exceeds {capacities[r]}" for r, w in per_route.items() if w > capacities[r]
    ]
    return problems


def optimal_face_is_singleton(instance: MarketInstance) -> bool:
    """True iff every column takes one value over all LP optima."""
    _check_guards(instance)
    cols = lp_columns(instance, positive_only=False)
    edge_rows = [({r for _, r in cols if e.id in r.edges}, e.capacity) for e in instance.network.edges]
    A, b = _trip_lp(instance, cols, edge_rows)
    c = [social_trip_value(instance, g, r) for g, r in cols]
    top = solve_lp(c, A_ub=A, b_ub=b, maximize=True)
    if top.status != OPTIMAL:
        raise LPError("LP relaxation has no optimum")
    for j in range(len(cols)):
        unit = [1 if k == j else 0 for k in range(len(cols))]
        lo = solve_lp(unit, A_ub=A, b_ub=b, A_eq=[c], b_eq=[top.objective])
        hi = solve_lp(unit, A_ub=A, b_ub=b, A_eq=[c], b_eq=[top.objective], maximize=True)
        if lo.objective != hi.objective:
            return False
    return True


# --------------------------------------------------------------------------
# Reassignment onto the greedy route set


def reassign_to_subnetwork(
    xhat: FractionalTripVector,
    capacities: RouteCapacityVector,
    instance: MarketInstance,
) -> FractionalTripVector:
    """Move fractional trip weight onto greedy routes.

    Groups are taken by decreasing sensitivity g (ties: size, then rider
    order); each pours its total weight into the fastest route that still
    has capacity, spilling into the next one at the boundary.
    """
    if not is_series_parallel(instance.network):
        raise NotSeriesParallel(frozenset(e.id for e in instance.network.edges))
    weight: dict[frozenset, Fraction] = {}
    for (g, _), w in xhat.items():
        if w:
            weight[g] = weight.get(g, Fraction(0)) + w
    order = sorted(
        weight,
        key=lambda g: (-group_sensitivity(instance, g)[1], len(g), sorted(instance.index[m] for m in g)),
    )
    routes = sorted(capacities.support, key=lambda r: (r.travel_time, r.key))
    room = {r: Fraction(capacities[r]) for r in routes}
    out: FractionalTripVector = {}
    pos = 0
    for g in order:
        left = weight[g]
        while left > 0:
            while pos < len(routes) and room[routes[pos]] == 0:
                pos += 1
            if pos == len(routes):
                raise ValueError("total trip weight exceeds greedy route capacity")
            r = routes[pos]
            amount = min(left, room[r])
            out[(g, r)] = out.get((g, r), Fraction(0)) + amount
            room[r] -= amount
            left -= amount
    return out


# --------------------------------------------------------------------------
# Vertex enumeration


class _FracTableau:
    """Plain Fraction tableau used only for vertex enumeration."""

    def __init__(self, rows: list[list[Fraction]], basis: list[int]):
        self.rows = rows
        self.basis = basis

    def copy(self) -> "_FracTableau":
        return _FracTableau([r[:] for r in self.rows], self.basis[:])

    def pivot(self, p: int, q: int) -> None:
        prow = self.rows[p]
        piv = prow[q]
        prow = [v / piv for v in prow]
        self.rows[p] = prow
        for i, row in enumerate(self.rows):
            if i != p and row[q]:
                f = row[q]
                self.rows[i] = [a - f * b for a, b in zip(row, prow)]
        self.basis[p] = q


def _reduce_system(n, A_ge, b_ge, A_eq, b_eq):
    """Drop zero-pinned variables, promote implicit equalities, remove redundant rows.

    Returns ``(kept variable indices, A_ge, b_ge, A_eq, b_eq)`` over the
    kept variables, or None when the system is infeasible.
    """

    def solve(c, ge, bge, maximize):
        return solve_lp(c, A_lb=ge, b_lb=bge, A_eq=A_eq, b_eq=b_eq, maximize=maximize)

    probe = solve([0] * n, A_ge, b_ge, False)
    if probe.status != OPTIMAL:
        return None
    keep = []
    for j in range(n):
        res = solve([1 if k == j else 0 for k in range(n)], A_ge, b_ge, True)
        if res.status != OPTIMAL or res.objective > 0:
            keep.append(j)
    # promote inequalities that hold with equality everywhere
    ge, bge = [], []
    for row, h in zip(A_ge, b_ge):
        res = solve(row, A_ge, b_ge, True)
        if res.status == OPTIMAL and res.objective == h:
            A_eq = A_eq + [row]
            b_eq = b_eq + [h]
        else:
            ge.append(row)
            bge.append(h)
    # drop inequalities implied by the others
    i = 0
    while i < len(ge):
        others, rhs = ge[:i] + ge[i + 1 :], bge[:i] + bge[i + 1 :]
        res = solve(ge[i], others, rhs, False)
        if res.status == OPTIMAL and res.objective >= bge[i]:
            ge, bge = others, rhs
        else:
            i += 1

    def project(rows):
        return [[row[j] for j in keep] for row in rows]

    return keep, project(ge), bge, project(A_eq), b_eq


def enumerate_vertices(
    n: int,
    A_ge: list[list[Fraction]],
    b_ge: list[Fraction],
    A_eq: list[list[Fraction]] = (),
    b_eq: list[Fraction] = (),
    max_bases: int = 200_000,
    prune: bool = True,
) -> list[tuple[Fraction, ...]]:
    """All vertices of {y >= 0 : A_ge y >= b_ge, A_eq y = b_eq}.

    Breadth-first search over feasible simplex bases, following every
    pivot that keeps feasibility (all ratio-test ties included).  The
    feasible-basis graph of a polyhedron is connected, so every vertex is
    reached.  Returns vertices sorted lexicographically.

    Implicit equalities, variables pinned at zero and redundant
    inequalities are removed first with exact LPs; this keeps the number
    of degenerate bases small on low-dimensional faces.
    """
    if prune:
        reduced = _reduce_system(n, list(A_ge), list(b_ge), list(A_eq), list(b_eq))
        if reduced is None:
            return []
        keep, A_ge, b_ge, A_eq, b_eq = reduced
        inner = enumerate_vertices(len(keep), A_ge, b_ge, A_eq, b_eq, max_bases, prune=False)
        out = []
        for y in inner:
            full = [Fraction(0)] * n
            for j, v in zip(keep, y):
                full[j] = v
            out.append(tuple(full))
        return sorted(out)
    rows: list[list[Fraction]] = []
    n_slack = len(A_ge)
    width = n + n_slack
    for i, (a, rhs) in enumerate(zip(A_ge, b_ge)):
        row = [Fraction(v) for v in a] + [Fraction(0)] * n_slack + [Fraction(rhs)]
        row[n + i] = Fraction(-1)
        rows.append(row)
    for a, rhs in zip(A_eq, b_eq):
        rows.append([Fraction(v) for v in a] + [Fraction(0)] * n_slack + [Fraction(rhs)])
    for row in rows:
        if row[-1] < 0:
            row[:] = [-v for v in row]
    m = len(rows)
    # phase one with artificial columns width .. width+m-1
    art_rows = [row[:-1] + [Fraction(int(i == k)) for k in range(m)] + [row[-1]] for i, row in enumerate(rows)]
    tab = _FracTableau(art_rows, list(range(width, width + m)))
    total = width + m
    cost = [Fraction(0)] * width + [Fraction(1)] * m
    while True:
        reduced = [cost[j] - sum(cost[tab.basis[i]] * tab.rows[i][j] for i in range(m)) for j in range(total)]
        q = next((j for j in range(total) if reduced[j] < 0), None)
        if q is None:
            break
        p, best = None, None
        for i in range(m):
            a = tab.rows[i][q]
            if a > 0:
                ratio = tab.rows[i][-1] / a
                if p is None or ratio < best or (ratio == best and tab.basis[i] < tab.basis[p]):
                    p, best = i, ratio
        tab.pivot(p, q)
    if any(tab.rows[i][-1] != 0 for i in range(m) if tab.basis[i] >= width):
        return []
    i = 0
    while i < len(tab.rows):
        if tab.basis[i] >= width:
            q = next((j for j in range(width) if tab.rows[i][j] != 0), None)
            if q is None:
                del tab.rows[i]
                del tab.basis[i]
                continue
            tab.pivot(i, q)
        i += 1
    tab.rows = [row[:width] + [row[-1]] for row in tab.rows]

    def vertex(t: _FracTableau) -> tuple[Fraction, ...]:
        y = [Fraction(0)] * n
        for i, bvar in enumerate(t.basis):
            if bvar < n:
                y[bvar] = t.rows[i][-1]
        return tuple(y)

    seen = {frozenset(tab.basis)}
    queue = deque([tab])
    vertices = set()
    while queue:
        t = queue.popleft()
        vertices.add(vertex(t))
        basic = set(t.basis)
        for q in range(width):
            if q in basic:
                continue
            ratios = [(t.rows[i][-1] / t.rows[i][q], i) for i in range(len(t.rows)) if t.rows[i][q] > 0]
            if not ratios:
                continue
            low = min(r for r, _ in ratios)
            for r, p in ratios:
                if r != low:
                    continue
                key = frozenset(basic - {t.basis[p]} | {q})
                if key in seen:
                    continue
                seen.add(key)
                if len(seen) > max_bases:
                    raise EnumerationGuard("vertex enumeration bases", len(seen), max_bases)
                nt = t.copy()
                nt.pivot(p, q)
                queue.append(nt)
    return sorted(vertices)


# --------------------------------------------------------------------------
# Dual optimal face


def dual_face_system(instance: MarketInstance, x: TripVector):
    """Linear description of all dual optima, given an LP-optimal integral x.

    Every dual optimum satisfies complementary slackness with x: riders
    left out of x have zero utility, edges with spare capacity have zero
    toll and every selected trip's constraint is tight.  Returns
    ``(variables, A_ge, b_ge, A_eq, b_eq)`` over the remaining variables,
    where each variable is ``("u", rider)`` or ``("tau", edge id)``;
    dominated inequalities are removed.
    """
    assigned = set(x.assignment())
    loads = x.edge_loads()
    saturated = [e.id for e in instance.network.edges if loads.get(e.id, 0) == e.capacity]
    riders = [m for m in instance.rider_ids if m in assigned]
    variables = [("u", m) for m in riders] + [("tau", e) for e in saturated]
    pos = {v: i for i, v in enumerate(variables)}
    rows: dict[tuple[frozenset, frozenset], Fraction] = {}
    for g in feasible_groups(instance):
        for r in instance.network.routes:
            v = social_trip_value(instance, g, r)
            if v <= 0:
                continue
            key = (frozenset(m for m in g if m in assigned), frozenset(e for e in r.edges if e in saturated))
            if v > rows.get(key, Fraction(0)):
                rows[key] = v
    kept = []
    for (S, T), h in rows.items():
        dominated = any(
            (S2, T2) != (S, T) and S2 <= S and T2 <= T and h2 >= h
            for (S2, T2), h2 in rows.items()
        )
        if not dominated:
            kept.append((S, T, h))

    def row(S, T):
        out = [Fraction(0)] * len(variables)
        for m in S:
            out[pos[("u", m)]] = Fraction(1)
        for e in T:
            out[pos[("tau", e)]] = Fraction(1)
        return out

    kept.sort(key=lambda sth: (sorted(pos[("u", m)] for m in sth[0]), sorted(pos[("tau", e)] for e in sth[1])))
    A_ge = [row(S, T) for S, T, _ in kept]
    b_ge = [h for _, _, h in kept]
    A_eq, b_eq = [], []
    for g, r in x.trips():
        A_eq.append(row(g, [e for e in r.edges if e in saturated]))
        b_eq.append(social_trip_value(instance, g, r))
    return variables, A_ge, b_ge, A_eq, b_eq


def dual_optimal_vertices(instance: MarketInstance, x: TripVector, max_bases: int = 200_000) -> list[tuple[dict, dict]]:
    """Every vertex (u, tau) of the dual optimal face, as full mappings."""
    variables, A_ge, b_ge, A_eq, b_eq = dual_face_system(instance, x)
    verts = enumerate_vertices(len(variables), A_ge, b_ge, A_eq, b_eq, max_bases=max_bases)
    out = []
    for y in verts:
        u = {m: Fraction(0) for m in instance.rider_ids}
        tau = {e.id: Fraction(0) for e in instance.network.edges}
        for (kind, name), val in zip(variables, y):
            (u if kind == "u" else tau)[name] = val
        out.append((u, tau))
    return out


def dual_face_extremes(instance: MarketInstance, x: TripVector) -> tuple[dict, Fraction]:
    """(max utility per rider, min toll revenue) over all dual optima, by exact LPs."""
    variables, A_ge, b_ge, A_eq, b_eq = dual_face_system(instance, x)
    cap = {e.id: e.capacity for e in instance.network.edges}
    best_u = {m: Fraction(0) for m in instance.rider_ids}
    n = len(variables)
    for i, (kind, name) in enumerate(variables):
        if kind != "u":
            continue
        res = solve_lp([1 if j == i else 0 for j in range(n)], A_lb=A_ge, b_lb=b_ge, A_eq=A_eq, b_eq=b_eq, maximize=True)
        if res.status != OPTIMAL:
            raise LPError(f"dual face LP is {res.status}")
        best_u[name] = res.objective
    revenue = [cap[name] if kind == "tau" else 0 for kind, name in variables]
    if not variables:
        return best_u, Fraction(0)
    res = solve_lp(revenue, A_lb=A_ge, b_lb=b_ge, A_eq=A_eq, b_eq=b_eq)
    if res.status != OPTIMAL:
        raise LPError(f"dual face LP is {res.status}")
    return best_u, res.objective
