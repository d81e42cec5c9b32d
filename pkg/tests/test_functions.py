from hypothesis import given, settings, strategies as st

from idkit.functions import (
    INF, CompositeFunction, PLQFunction, PolyhedralFunction, PolyMap, active_sets_f, epigraph,
    horizon_subdifferential, make_univariate, prox, qualification_check, subdifferential,
    subdifferential_composite, value,
)
from idkit.numerics import Q, Rational
from idkit.polyhedra import Polyhedron, cone_member
from conftest import abs_plq, qv

HALF = Rational(1, 2)


def _set(gens):
    return sorted(gens)


def test_value(mx3, absf):
    assert value(mx3, qv(1, 1, 0)) == 1
    assert value(absf, qv(-2)) == 2
    quad = PLQFunction.separable([make_univariate([], [(1, 0, 0)])])
    assert value(quad, qv(3)) == Rational(9, 2)


def test_value_outside_domain():
    f = PolyhedralFunction.make([((0,), 0)], [((1,), 0)], 1)
    assert f.value(qv(1)) == INF


def test_active_sets(mx3, absf):
    assert active_sets_f(mx3, qv(1, 1, 0)) == ((0, 1), ())
    assert active_sets_f(absf, qv(0))[0] == (0, 1)
    f = PolyhedralFunction.make([((0,), 0)], [((1,), 0)], 1)
    assert active_sets_f(f, qv(0))[1] == (0,)


def test_subdifferential(mx3, absf):
    S = subdifferential(mx3, qv(0, 0, 0))
    assert _set(S.conv_gens) == _set([qv(1, 0, 0), qv(0, 1, 0), qv(0, 0, 1)])
    assert _set(subdifferential(absf, qv(0)).conv_gens) == [qv(-1), qv(1)]
    assert subdifferential(mx3, qv(1, 0, 0)).conv_gens == (qv(1, 0, 0),)


def test_horizon_subdifferential(mx3):
    assert horizon_subdifferential(mx3, qv(1, 2, 3)).ray_gens == ()
    ind = PolyhedralFunction.indicator(Polyhedron.from_rows([[-1]], [0]))
    assert horizon_subdifferential(ind, qv(0)).ray_gens == (qv(-1),)
    f = PolyhedralFunction.make([((1,), 0), ((-1,), 0)], [((1,), 1), ((-1,), 0)], 1)
    assert horizon_subdifferential(f, qv(1)).ray_gens == (qv(1),)


def test_epigraph(absf, mx2):
    E = epigraph(absf)
    assert E.contains(qv(1, 1)) and E.contains(qv(-1, 2)) and not E.contains(qv(1, 0))
    E = epigraph(mx2)
    assert E.contains(qv(1, 0, 1)) and not E.contains(qv(1, 0, 0))
    f = PolyhedralFunction.make([((0,), 0)], [((1,), 0)], 1)
    E = epigraph(f)
    assert E.contains(qv(-1, 0)) and not E.contains(qv(1, 5)) and not E.contains(qv(-1, -1))


def test_qualification(mx2):
    F = PolyMap.make([[(1, (2,))]], 1)
    ind = PolyhedralFunction.indicator(Polyhedron.from_rows([[1]], [0]))
    assert not qualification_check(CompositeFunction(ind, F), qv(0))
    assert qualification_check(CompositeFunction(ind, PolyMap.identity(1)), qv(0))
    G = PolyMap.make([[(1, (1,))], [(-1, (1,))]], 1)
    assert qualification_check(CompositeFunction(mx2, G), qv(0))


def test_subdifferential_composite(mx2):
    G = PolyMap.make([[(1, (1,))], [(-1, (1,))]], 1)
    S = subdifferential_composite(CompositeFunction(mx2, G), qv(0))
    assert _set(S.conv_gens) == [qv(-1), qv(1)]
    ident = CompositeFunction(mx2, PolyMap.identity(2))
    x = qv(0, 0)
    assert _set(subdifferential_composite(ident, x).conv_gens) == _set(subdifferential(mx2, x).conv_gens)
    # max(x1^2, x2) at (1, 1): gradients (2, 0) and (0, 1)
    H = PolyMap.make([[(1, (2, 0))], [(1, (0, 1))]], 2)
    S = subdifferential_composite(CompositeFunction(mx2, H), qv(1, 1))
    assert _set(S.conv_gens) == _set([qv(2, 0), qv(0, 1)])


def test_prox():
    f = abs_plq()
    assert prox(f, 1, qv(2)) == qv(1)
    assert prox(f, 1, qv(HALF)) == qv(0)
    zero = PLQFunction.separable([make_univariate([], [(0, 0, 0)])])
    assert prox(zero, 3, qv(Rational(7, 5))) == qv(Rational(7, 5))


def test_prox_polyhedral_matches_plq(absf):
    assert prox(absf, 1, qv(2)) == qv(1)


@settings(max_examples=60)
@given(st.fractions(-5, 5), st.fractions(Rational(1, 4), 3))
def test_prox_residual_is_subgradient(z, lam):
    """(z - p) / lam lies in the subdifferential at p = prox(z)."""
    f = abs_plq()
    z, lam = qv(z), Q(lam)
    p = prox(f, lam, z)
    v = tuple((a - b) / lam for a, b in zip(z, p))
    assert cone_member(v, subdifferential(f, p))


@settings(max_examples=60)
@given(st.lists(st.integers(-4, 4), min_size=3, max_size=3))
def test_mx_value_is_max(xs):
    f = PolyhedralFunction.max_function(3)
    assert f.value(qv(*xs)) == max(xs)


def test_polymap_jacobian():
    F = PolyMap.make([[(1, (2, 0)), (3, (1, 1))]], 2)
    assert F.value(qv(2, 1)) == (Q(10),)
    assert F.jacobian(qv(2, 1)) == ((Q(7), Q(6)),)


def test_json_round_trip(mx3):
    assert PolyhedralFunction.from_json(mx3.to_json()) == mx3
    F = PolyMap.make([[(Rational(1, 3), (2, 1))]], 2)
    assert PolyMap.from_json(F.to_json()).value(qv(1, 2)) == F.value(qv(1, 2))
