import random
from fractions import Fraction

import pytest
from hypothesis import given
from scipy.optimize import linprog

from carpool.simplex import INFEASIBLE, OPTIMAL, UNBOUNDED, solve_lp

from conftest import seeds


def random_lp(rng):
    n = rng.randint(1, 5)
    m = rng.randint(1, 5)

    def coeff():
        return Fraction(rng.randint(-4, 6), rng.choice([1, 1, 2, 3]))

    c = [coeff() for _ in range(n)]
    A_ub = [[coeff() for _ in range(n)] for _ in range(m)]
    b_ub = [Fraction(rng.randint(-2, 8)) for _ in range(m)]
    A_eq, b_eq = [], []
    if rng.random() < 0.3:
        A_eq = [[coeff() for _ in range(n)]]
        b_eq = [Fraction(rng.randint(0, 4))]
    return c, A_ub, b_ub, A_eq, b_eq


@given(seeds)
def test_matches_scipy(seed):
    c, A_ub, b_ub, A_eq, b_eq = random_lp(random.Random(seed))
    ours = solve_lp(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq)
    ref = linprog(
        [float(v) for v in c],
        A_ub=[[float(v) for v in row] for row in A_ub],
        b_ub=[float(v) for v in b_ub],
        A_eq=[[float(v) for v in row] for row in A_eq] or None,
        b_eq=[float(v) for v in b_eq] or None,
        method="highs",
    )
    expected = {0: OPTIMAL, 2: INFEASIBLE, 3: UNBOUNDED}[ref.status]
    assert ours.status == expected
    if ours.ok:
        assert float(ours.objective) == pytest.approx(ref.fun, abs=1e-7)
        x = ours.x
        assert all(v >= 0 for v in x)
        for row, b in zip(A_ub, b_ub):
            assert sum(a * v for a, v in zip(row, x)) <= b
        for row, b in zip(A_eq, b_eq):
            assert sum(a * v for a, v in zip(row, x)) == b
        assert ours.objective == sum(a * v for a, v in zip(c, x))


def test_small_maximisation_exact():
    # max x + y, x + 2y <= 4, 3x + y <= 6 -> (8/5, 6/5)
    res = solve_lp([1, 1], A_ub=[[1, 2], [3, 1]], b_ub=[4, 6], maximize=True)
    assert res.status == OPTIMAL
    assert res.x == [Fraction(8, 5), Fraction(6, 5)]
    assert res.objective == Fraction(14, 5)


def test_lower_bound_rows():
    res = solve_lp([1, 1], A_lb=[[1, 1], [1, -1]], b_lb=[3, Fraction(1, 2)])
    assert res.objective == 3
    assert res.x[0] - res.x[1] >= Fraction(1, 2)


def test_infeasible_and_unbounded():
    assert solve_lp([1], A_ub=[[1]], b_ub=[-1]).status == INFEASIBLE
    assert solve_lp([1], A_ub=[[-1]], b_ub=[0], maximize=True).status == UNBOUNDED


def test_redundant_equalities():
    res = solve_lp([1, 2], A_eq=[[1, 1], [2, 2]], b_eq=[2, 4])
    assert res.status == OPTIMAL and res.x == [2, 0]


def test_width_mismatch():
    with pytest.raises(ValueError):
        solve_lp([1, 1], A_ub=[[1]], b_ub=[1])
