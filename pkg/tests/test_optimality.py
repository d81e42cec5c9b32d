import pytest

from idkit.errors import NotANormal, NotCritical
from idkit.functions import PLQFunction, PolyhedralFunction, PolyMap, make_univariate
from idkit.identify import BoxDescriptor, Face, Verdict, WholeSpace, minimal_identifiable_set_separable
from idkit.numerics import Q, Rational
from idkit.optimality import (
    GrowthVerdict, exact_growth_estimate, growth_equivalence_check, growth_transfer_check,
    growth_verdict, refined_growth_estimate, restricted_optimality_check,
)
from conftest import abs_plq, abs_plus_quad, qv

ZERO2 = qv(0, 0)
M_AXIS = BoxDescriptor((Q(0), None), (Q(0), None))


def quad():
    return PLQFunction.separable([make_univariate([], [(2, 0, 0)])])


def test_restricted_optimality(orthant, square):
    r = restricted_optimality_check(orthant, Face(orthant, (), (0,)), ZERO2, qv(-1, 0))
    assert (r.max_on_M, r.max_on_Q) == (True, True)
    with pytest.raises(NotANormal):
        restricted_optimality_check(orthant, Face(orthant, (), (0,)), ZERO2, qv(1, 0))
    r = restricted_optimality_check(square, Face(square, (), (0, 2)), qv(1, 1), qv(1, 1))
    assert r == (True, True, True, True)


def test_growth_abs_plus_square():
    f = abs_plus_quad(1)
    cmp_ = growth_equivalence_check(f, M_AXIS, ZERO2)
    assert cmp_.on_M.verdict is GrowthVerdict.GROWTH and cmp_.on_M.c == 1
    assert cmp_.ambient.verdict is GrowthVerdict.GROWTH and cmp_.agree


def test_growth_quadratic():
    cmp_ = growth_equivalence_check(quad(), WholeSpace(1), qv(0))
    assert cmp_.on_M.verdict is cmp_.ambient.verdict is GrowthVerdict.GROWTH
    assert cmp_.ambient.c == 1


def test_growth_requires_critical_point(mx2):
    with pytest.raises(NotCritical):
        growth_equivalence_check(mx2, Face(mx2, (0, 1), ()), ZERO2)


def test_growth_linear_piece_no_growth():
    # f = max(x, 0) is minimized at 0 but has zero growth to the left
    f = PLQFunction.separable([make_univariate([0], [(0, 0, 0), (0, 1, 0)])])
    est = exact_growth_estimate(f, qv(0))
    assert est.verdict is GrowthVerdict.NO_GROWTH


def test_growth_transfer_pass():
    f = abs_plus_quad(1)
    g = PolyMap.make([[(Rational(1, 4), (2, 0)), (Rational(1, 4), (0, 2))]], 2)
    rep = growth_transfer_check(f, M_AXIS, ZERO2, g, 1300, 0)
    assert rep.verdict is Verdict.PASS


def test_growth_transfer_not_applicable():
    f = abs_plus_quad(Rational(1, 4))
    g = PolyMap.make([[(1, (2, 0)), (1, (0, 2))]], 2)
    rep = growth_transfer_check(f, M_AXIS, ZERO2, g, 1300, 0)
    assert rep.verdict is Verdict.NOT_APPLICABLE


def test_growth_transfer_zero_function():
    f = abs_plus_quad(1)
    g = PolyMap.make([[(0, (0, 0))]], 2)
    rep = growth_transfer_check(f, M_AXIS, ZERO2, g, 650, 0)
    assert rep.verdict is Verdict.PASS


def test_refined_growth():
    x2 = PolyMap.make([[(1, (2,))]], 1)
    est = refined_growth_estimate(x2, qv(0), 650, 0)
    assert est.verdict is GrowthVerdict.GROWTH and abs(float(est.c) - 1) < 1e-9
    est = refined_growth_estimate(abs_plq(), qv(0), 650, 0)
    assert est.verdict is GrowthVerdict.GROWTH
    x4 = PolyMap.make([[(1, (4,))]], 1)
    est = refined_growth_estimate(x4, qv(0), 650, 0)
    assert est.verdict is GrowthVerdict.NO_GROWTH


def test_growth_verdict_rule():
    assert growth_verdict([1, 1, 1]) == (GrowthVerdict.GROWTH, 1)
    assert growth_verdict([1, 0, 0])[0] is GrowthVerdict.NO_GROWTH
    assert growth_verdict([None, None, None])[0] is GrowthVerdict.GROWTH
    assert growth_verdict([8, 4, 2, 1])[0] is GrowthVerdict.INCONCLUSIVE


def test_box_from_separable_matches_axis():
    M = minimal_identifiable_set_separable(abs_plus_quad(1), ZERO2, ZERO2)
    for x in (qv(0, 3), qv(1, 0), qv(0, -2)):
        assert M.contains(x) == M_AXIS.contains(x)
