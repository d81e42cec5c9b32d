import pytest

from idkit.errors import EmptyMultiplierSet, InvalidSplit, NotANormal
from idkit.functions import CompositeFunction, PolyhedralFunction, PolyMap
from idkit.identify import (
    Face, Verdict, WholeSpace, graph_reduction_verify, identifiability_verify, locality_radius,
    minimal_identifiable_set, minimal_identifiable_set_composite, minimal_identifiable_set_f,
    minimal_identifiable_set_separable, multiplier_polytope, necessity_verify,
    nonstabilization_demo, projection_representation, quartic_curve_limit, radius_schedule,
    strict_complementarity, sum_rule_identifiable,
)
from idkit.numerics import Q, Rational
from conftest import abs_plus_quad, qv

HALF = Rational(1, 2)


# --- multipliers -----------------------------------------------------------

def test_multiplier_polytope_singleton(mx3, absf):
    ms = multiplier_polytope(mx3, qv(0, 0, 0), qv(HALF, HALF, 0))
    full, (lam, mu) = strict_complementarity(ms)
    assert lam == qv(HALF, HALF, 0) and not full
    full, (lam, _) = strict_complementarity(multiplier_polytope(absf, qv(0), qv(0)))
    assert full and lam == qv(HALF, HALF)


def test_multiplier_polytope_empty(mx3):
    ms = multiplier_polytope(mx3, qv(0, 0, 0), qv(2, 0, 0))
    assert ms.is_empty()
    with pytest.raises(EmptyMultiplierSet):
        strict_complementarity(ms)


def test_strict_complementarity_boundary(absf):
    full, (lam, _) = strict_complementarity(multiplier_polytope(absf, qv(0), qv(1)))
    assert not full and lam == qv(1, 0)


# --- minimal identifiable sets ---------------------------------------------

def test_minimal_set_orthant(orthant):
    M = minimal_identifiable_set(orthant, qv(0, 0), qv(-1, 0))
    assert M.contains(qv(0, 5)) and not M.contains(qv(1, 0))
    M = minimal_identifiable_set(orthant, qv(0, 0), qv(-1, -1))
    assert M.contains(qv(0, 0)) and not M.contains(qv(0, 1))


def test_minimal_set_interior(square):
    M = minimal_identifiable_set(square, (HALF, HALF), qv(0, 0))
    assert M.contains(qv(0, 0)) and M.contains(qv(1, HALF))


def test_minimal_set_requires_normal(orthant):
    with pytest.raises(NotANormal):
        minimal_identifiable_set(orthant, qv(0, 0), qv(1, 0))


def test_minimal_set_f(mx3, absf):
    M = minimal_identifiable_set_f(mx3, qv(0, 0, 0), qv(HALF, HALF, 0))
    assert M.contains(qv(2, 2, 1)) and not M.contains(qv(2, 1, 0)) and M.contains(qv(1, 1, 3)) is False
    M = minimal_identifiable_set_f(absf, qv(0), qv(0))
    assert M.contains(qv(0)) and not M.contains(qv(Rational(1, 100)))
    M = minimal_identifiable_set_f(absf, qv(0), qv(1))
    assert M.contains(qv(3)) and not M.contains(qv(-1))


def test_minimal_set_separable():
    f = abs_plus_quad()
    M = minimal_identifiable_set_separable(f, qv(0, 0), qv(0, 0))
    assert M.contains(qv(0, 7)) and not M.contains(qv(1, 0))
    M = minimal_identifiable_set_separable(f, qv(0, 0), qv(1, 0))
    assert M.contains(qv(4, -2)) and not M.contains(qv(-1, 0))


def _max_sq_lin():
    F = PolyMap.make([[(1, (2,))], [(1, (1,))]], 1)
    return CompositeFunction(PolyhedralFunction.max_function(2), F)


def test_minimal_set_composite():
    cf = _max_sq_lin()
    M = minimal_identifiable_set_composite(cf, qv(0), qv(1))
    ((y, face),) = M.inner
    assert y == qv(0, 1) and face.supp_lambda == (1,)
    assert M.contains(qv(HALF)) and not M.contains(qv(-HALF))
    M = minimal_identifiable_set_composite(cf, qv(0), qv(0))
    ((y, face),) = M.inner
    assert y == qv(1, 0)
    assert M.contains(qv(-HALF)) and not M.contains(qv(HALF))


def test_minimal_set_composite_affine_case(mx2):
    cf = CompositeFunction(mx2, PolyMap.identity(2))
    M = minimal_identifiable_set_composite(cf, qv(0, 0), qv(HALF, HALF))
    Mf = minimal_identifiable_set_f(mx2, qv(0, 0), qv(HALF, HALF))
    for x in (qv(1, 1), qv(1, 0), qv(-2, -2), qv(0, 3)):
        assert M.contains(x) == Mf.contains(x)


def test_sum_rule(absf, mx2):
    zero = PolyhedralFunction.linear(qv(0))
    M = sum_rule_identifiable([absf, zero], qv(0), qv(1), [qv(1), qv(0)])
    assert M.contains(qv(2)) and not M.contains(qv(-1))
    M = sum_rule_identifiable([absf, absf], qv(0), qv(0), [qv(0), qv(0)])
    assert M.contains(qv(0)) and not M.contains(qv(1)) and not M.contains(qv(-1))
    lin = PolyhedralFunction.linear(qv(1, 0))
    M = sum_rule_identifiable([mx2, lin], qv(0, 0), qv(Rational(3, 2), HALF),
                              [qv(HALF, HALF), qv(1, 0)])
    assert M.contains(qv(3, 3)) and not M.contains(qv(3, 2))
    with pytest.raises(InvalidSplit):
        sum_rule_identifiable([absf, absf], qv(0), qv(0), [qv(1), qv(0)])


# --- verifiers --------------------------------------------------------------

def test_radius_schedule():
    r = radius_schedule(1)
    assert len(r) == 13 and r[0] == 1 and r[-1] == Rational(1, 4096)


def test_identifiability_orthant(orthant):
    x, v = qv(0, 0), qv(-1, 0)
    rep = identifiability_verify(orthant, Face(orthant, (), (0,)), x, v, 10_000, seed=0)
    assert rep.verdict is Verdict.PASS and rep.samples_total >= 9_999 and not rep.violations
    rep = identifiability_verify(orthant, Face(orthant, (), (0, 1)), x, v, 1300, seed=0)
    assert rep.verdict is Verdict.FAIL
    w = rep.violations[0]["x"]
    assert w[0] == 0 and w[1] > 0
    rep = identifiability_verify(orthant, WholeSpace(2), x, v, 650, seed=0)
    assert rep.verdict is Verdict.PASS


def test_identifiability_function_and_epigraph_routes(mx2):
    x, v = qv(0, 0), qv(HALF, HALF)
    M = minimal_identifiable_set_f(mx2, x, v)
    a = identifiability_verify(mx2, M, x, v, 650, seed=3, route="function")
    b = identifiability_verify(mx2, M, x, v, 650, seed=3, route="epigraph")
    assert a.verdict is b.verdict is Verdict.PASS


def test_necessity_orthant(orthant):
    x, v = qv(0, 0), qv(-1, 0)
    rep = necessity_verify(orthant, Face(orthant, (), (0,)), x, v, 1300, seed=0)
    assert rep.verdict is Verdict.PASS
    rep = necessity_verify(orthant, WholeSpace(2), x, v, 1300, seed=0)
    assert rep.verdict is Verdict.FAIL
    rep = necessity_verify(orthant, Face(orthant, (), (0, 1)), x, v, 650, seed=0)
    assert rep.verdict is Verdict.PASS


def test_graph_reduction(orthant, square):
    rep = graph_reduction_verify(orthant, Face(orthant, (), (0,)), qv(0, 0), qv(-1, 0), 1300, 0)
    assert rep.verdict is Verdict.PASS
    rep = graph_reduction_verify(square, Face(square, (), (0,)), qv(1, HALF), qv(1, 0), 1300, 0)
    assert rep.verdict is Verdict.PASS
    rep = graph_reduction_verify(square, Face(square, (), ()), (HALF, HALF), qv(0, 0), 650, 0)
    assert rep.verdict is Verdict.PASS


def test_graph_reduction_smaller_face_fails(orthant):
    rep = graph_reduction_verify(orthant, Face(orthant, (), (0, 1)), qv(0, 0), qv(-1, 0), 1300, 0)
    assert rep.verdict is Verdict.FAIL and rep.violations


def test_projection_representation(orthant, square):
    rep = projection_representation(orthant, qv(0, 0), qv(-1, 0), 1, HALF, 500, 0)
    assert rep.verdict is Verdict.PASS
    rep = projection_representation(square, qv(1, 1), qv(1, 1), 1, None, 500, 0)
    assert rep.verdict is Verdict.PASS
    rep = projection_representation(square, (HALF, HALF), qv(0, 0), 1, None, 500, 0)
    assert rep.verdict is Verdict.PASS


def test_locality_radius_positive(orthant, square):
    assert 0 < locality_radius(orthant, qv(0, 0), qv(-1, 0)) <= 1
    assert 0 < locality_radius(square, qv(1, 1), qv(1, 0)) <= 1


def test_report_json_round_trip(orthant):
    rep = identifiability_verify(orthant, Face(orthant, (), (0, 1)), qv(0, 0), qv(-1, 0), 650, 0)
    js = rep.to_json()
    assert js["verdict"] == "FAIL"
    assert all(Q(t) == s for t, s in zip(js["violations"][0]["x"], rep.violations[0]["x"]))


def test_determinism(orthant):
    a = identifiability_verify(orthant, Face(orthant, (), (0, 1)), qv(0, 0), qv(-1, 0), 650, 7)
    b = identifiability_verify(orthant, Face(orthant, (), (0, 1)), qv(0, 0), qv(-1, 0), 650, 7)
    assert a.to_json() == b.to_json()


# --- non-stabilization ------------------------------------------------------

def test_lorentz_witnesses():
    rep = nonstabilization_demo("LORENTZ")
    assert rep["locally_minimal_identifiable_set"] == "NONE"
    assert rep["separated_at_all_radii"]
    radii = [Q(w["radius"]) for w in rep["witnesses"]]
    assert min(radii) <= Rational(1, 10**6)
    for w in rep["witnesses"]:
        assert Q(w["cosine"]) == Rational(3, 8) and w["in_M_eps"] and not w["in_M_eps_prime"]


def test_quartic_limits_closed_form():
    # along y = n x^2 the squared gradient norm tends to 1 / (n^2 + 1)
    for n in (1, 2, 10):
        lim, _, sq = quartic_curve_limit(n)
        assert sq == Rational(1, n * n + 1)
        assert abs(lim - (n * n + 1) ** -0.5) < 1e-12
