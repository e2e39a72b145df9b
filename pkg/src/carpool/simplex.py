"""Exact two-phase simplex on a fraction-free integer tableau.

Every row is scaled to integers once; pivots then use the Bareiss
update ``T[i][j] = (T[p][q]*T[i][j] - T[i][q]*T[p][j]) // d`` where
``d`` is the previous pivot, so all entries stay integral and the
division is exact.  Basic solution values are ``T[i][rhs] / d``.

Pivoting follows Bland's rule (lowest-index entering column, ratio ties
to the lowest-index basic variable), which guarantees termination and
makes the returned vertex deterministic.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Sequence

Number = Fraction | int

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


class LPError(ArithmeticError):
    """Raised when an LP expected to be solvable is infeasible or unbounded."""


@dataclass
class LPResult:
    status: str
    x: list[Fraction] | None = None
    objective: Fraction | None = None
    basis: tuple[int, ...] | None = None

    @property
    def ok(self) -> bool:
        return self.status == OPTIMAL


def _integer_row(coeffs: Sequence[Number], rhs: Number) -> tuple[list[int], int]:
    vals = [Fraction(c) for c in coeffs] + [Fraction(rhs)]
    scale = lcm(*(v.denominator for v in vals)) if vals else 1
    ints = [int(v * scale) for v in vals]
    return ints[:-1], ints[-1]


class _Tableau:
    def __init__(self, rows: list[list[int]], basis: list[int], n_cols: int):
        # rows[i] has n_cols entries followed by the rhs
        self.rows = rows
        self.basis = basis
        self.n_cols = n_cols
        self.d = 1
        self.obj: list[int] = [0] * (n_cols + 1)

    def pivot(self, p: int, q: int) -> None:
        rows, d = self.rows, self.d
        prow = rows[p]
        pq = prow[q]
        for i, row in enumerate(rows):
            if i == p:
                continue
            iq = row[q]
            if iq == 0:
                if pq != d:
                    rows[i] = [v * pq // d if v else 0 for v in row]
            else:
                rows[i] = [(v * pq - iq * pv) // d for v, pv in zip(row, prow)]
        obj, oq = self.obj, self.obj[q]
        if oq == 0:
            self.obj = [v * pq // d for v in obj]
        else:
            self.obj = [(v * pq - oq * pv) // d for v, pv in zip(obj, prow)]
        self.d = pq
        self.basis[p] = q
        if pq < 0:
            self.d = -pq
            self.rows = [[-v for v in row] for row in self.rows]
            self.obj = [-v for v in self.obj]

    def set_objective(self, cost: Sequence[int]) -> None:
        """Reduced-cost row (times d) for minimising ``cost . x``."""
        d = self.d
        obj = [d * c for c in cost] + [0]
        for i, b in enumerate(self.basis):
            cb = cost[b]
            if cb:
                row = self.rows[i]
                for j in range(len(obj)):
                    if row[j]:
                        obj[j] -= cb * row[j]
        self.obj = obj

    def run(self, allowed: int) -> str:
        """Minimise with entering columns restricted to indices < allowed."""
        while True:
            obj = self.obj
            q = next((j for j in range(allowed) if obj[j] < 0), None)
            if q is None:
                return OPTIMAL
            p = None
            for i, row in enumerate(self.rows):
                a = row[q]
                if a > 0:
                    if p is None:
                        p = i
                        continue
                    best = self.rows[p]
                    lhs, rhs = row[-1] * best[q], best[-1] * a
                    if lhs < rhs or (lhs == rhs and self.basis[i] < self.basis[p]):
                        p = i
            if p is None:
                return UNBOUNDED
            self.pivot(p, q)

    def values(self, n: int) -> list[Fraction]:
        x = [Fraction(0)] * n
        for i, b in enumerate(self.basis):
            if b < n:
                x[b] = Fraction(self.rows[i][-1], self.d)
        return x


def solve_lp(
    c: Sequence[Number],
    A_ub: Sequence[Sequence[Number]] = (),
    b_ub: Sequence[Number] = (),
    A_eq: Sequence[Sequence[Number]] = (),
    b_eq: Sequence[Number] = (),
    A_lb: Sequence[Sequence[Number]] = (),
    b_lb: Sequence[Number] = (),
    maximize: bool = False,
) -> LPResult:
    """Optimise ``c . x`` subject to ``A_ub x <= b_ub``, ``A_eq x = b_eq``,
    ``A_lb x >= b_lb`` and ``x >= 0``, exactly.

    The returned ``basis`` lists the basic column per row; indices at or
    above ``len(c)`` are slack or surplus columns in row order.
    """
    n = len(c)
    specs: list[tuple[list[int], int, str]] = []
    for coeffs, rhs, kind in (
        *((a, b, "le") for a, b in zip(A_ub, b_ub)),
        *((a, b, "ge") for a, b in zip(A_lb, b_lb)),
        *((a, b, "eq") for a, b in zip(A_eq, b_eq)),
    ):
        if len(coeffs) != n:
            raise ValueError("constraint width does not match the objective")
        row, r = _integer_row(coeffs, rhs)
        if r < 0:
            row, r = [-v for v in row], -r
            kind = {"le": "ge", "ge": "le", "eq": "eq"}[kind]
        specs.append((row, r, kind))

    n_slack = sum(1 for _, _, k in specs if k != "eq")
    n_art = sum(1 for _, _, k in specs if k != "le")
    width = n + n_slack + n_art
    rows: list[list[int]] = []
    basis: list[int] = []
    slack_col, art_col = n, n + n_slack
    artificial_rows = []
    for i, (row, r, kind) in enumerate(specs):
        full = row + [0] * (n_slack + n_art) + [r]
        if kind == "le":
            full[slack_col] = 1
            basis.append(slack_col)
            slack_col += 1
        else:
            if kind == "ge":
                full[slack_col] = -1
                slack_col += 1
            full[art_col] = 1
            basis.append(art_col)
            artificial_rows.append(i)
            art_col += 1
        rows.append(full)

    tab = _Tableau(rows, basis, width)
    first_art = n + n_slack
    if n_art:
        tab.set_objective([0] * first_art + [1] * n_art)
        tab.run(width)
        if tab.obj[-1] != 0:
            return LPResult(INFEASIBLE)
        # drive zero-level artificials out of the basis
        i = 0
        while i < len(tab.rows):
            if tab.basis[i] >= first_art:
                row = tab.rows[i]
                q = next((j for j in range(first_art) if row[j] != 0), None)
                if q is None:
                    del tab.rows[i]
                    del tab.basis[i]
                    continue
                tab.pivot(i, q)
            i += 1
        tab.rows = [row[:first_art] + [row[-1]] for row in tab.rows]
    tab.n_cols = first_art

    sign = -1 if maximize else 1
    cost_frac = [Fraction(v) * sign for v in c] + [Fraction(0)] * n_slack
    scale = lcm(*(v.denominator for v in cost_frac)) if cost_frac else 1
    tab.set_objective([int(v * scale) for v in cost_frac])
    status = tab.run(first_art)
    if status != OPTIMAL:
        return LPResult(status)
    x = tab.values(n)
    objective = sum((Fraction(ci) * xi for ci, xi in zip(c, x)), Fraction(0))
    return LPResult(OPTIMAL, x, objective, tuple(tab.basis))
