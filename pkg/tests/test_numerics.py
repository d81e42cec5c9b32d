from hypothesis import given, strategies as st

from idkit.numerics import (
    LPStatus, Q, Rational, format_rational, lp_solve, parse_rational, rank, solve_linear,
    sqrt_ceil, sqrt_floor,
)
from conftest import qv


def test_lp_box_maximum():
    A = [[1, 0], [0, 1], [-1, 0], [0, -1]]
    res = lp_solve(qv(1, 1), A, qv(1, 1, 0, 0))
    assert res.optimum == 2 and res.primal == qv(1, 1)


def test_lp_orthant_support_and_dual():
    res = lp_solve(qv(-1, 0), [[-1, 0], [0, -1]], qv(0, 0))
    assert res.optimum == 0 and res.primal[0] == 0
    assert res.dual == qv(1, 0)


def test_lp_simplex_vertex():
    A = [[-1, 0, 0], [0, -1, 0], [0, 0, -1], [1, 1, 1], [-1, -1, -1]]
    res = lp_solve(qv(2, 3, 1), A, qv(0, 0, 0, 1, -1))
    assert res.optimum == 3 and res.primal == qv(0, 1, 0)


def test_lp_unbounded_and_infeasible():
    assert lp_solve(qv(1), [[-1]], qv(0)).status is LPStatus.UNBOUNDED
    assert lp_solve(qv(1), [[1], [-1]], qv(0, -1)).status is LPStatus.INFEASIBLE


def test_solve_linear_identity():
    assert solve_linear([[1, 0], [0, 1]], qv(1, 2)).solution == qv(1, 2)


def test_solve_linear_null_space():
    sol = solve_linear([[1, 1]], qv(0))
    assert sol.solution == qv(0, 0)
    (b,) = sol.null_basis
    assert b[0] == -b[1] != 0


def test_solve_linear_inconsistent():
    assert solve_linear([[1], [1]], qv(0, 1)).solution is None


def test_rational_round_trip():
    for s in ("0", "-3/4", "7", "1/3"):
        assert format_rational(parse_rational(s)) == s
    assert parse_rational("0.5") == Rational(1, 2)


@given(st.fractions(min_value=0, max_value=1000))
def test_sqrt_brackets(f):
    q = Q(f)
    lo, hi = sqrt_floor(q), sqrt_ceil(q)
    assert lo * lo <= q <= hi * hi
    assert lo >= 0


@given(st.lists(st.lists(st.integers(-3, 3), min_size=3, max_size=3), min_size=1, max_size=4))
def test_rank_bounded(rows):
    r = rank(rows)
    assert 0 <= r <= min(len(rows), 3)


@given(st.lists(st.integers(-5, 5), min_size=2, max_size=2),
       st.lists(st.integers(-5, 5), min_size=2, max_size=2))
def test_lp_strong_duality(c, shift):
    # max <c, x> over the box shift + [0, 1]^2 is attained, dual certifies it
    A = [[1, 0], [0, 1], [-1, 0], [0, -1]]
    b = qv(shift[0] + 1, shift[1] + 1, -shift[0], -shift[1])
    res = lp_solve(qv(*c), A, b)
    assert res.optimal
    assert sum(y * bi for y, bi in zip(res.dual, b)) == res.optimum
    assert all(y >= 0 for y in res.dual)
