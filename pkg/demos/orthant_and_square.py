"""Identifiable faces of the nonnegative orthant and the unit square."""
from idkit.critcone import critical_cone, tangential_approx_verify
from idkit.identify import (
    Face, graph_reduction_verify, identifiability_verify, minimal_identifiable_set,
    multiplier_polytope, strict_complementarity,
)
from idkit.numerics import Q, format_rational
from idkit.polyhedra import Polyhedron

fmt = lambda v: "(" + ", ".join(format_rational(t) for t in v) + ")"  # noqa: E731

# orthant R^2_+ at the origin, normal (-1, 0)
O = Polyhedron.orthant(2)
x, v = (Q(0), Q(0)), (Q(-1), Q(0))
M = minimal_identifiable_set(O, x, v)
print("orthant: tight rows of M", M.supp_mu)          # (0,): the face x1 = 0
print("  (0, 3) in M:", M.contains((Q(0), Q(3))))
print("  (1, 0) in M:", M.contains((Q(1), Q(0))))

rep = identifiability_verify(O, M, x, v, budget=2600, seed=0)
print("  identifiability:", rep.verdict.value, rep.samples_total, "samples")

# the vertex alone is too small: points (0, t) carry normals near v
rep = identifiability_verify(O, Face(O, (), (0, 1)), x, v, budget=2600, seed=0)
print("  vertex only:", rep.verdict.value, "witness", fmt(rep.violations[0]["x"]))

K = critical_cone(O, x, v)
print("  critical cone rows", [fmt(a) for a in K.K.A])
print("  T_M(0) = K:", tangential_approx_verify(O, M, x, v))

# unit square at the corner (1, 1)
S = Polyhedron.box([0, 0], [1, 1])
x = (Q(1), Q(1))
for v in ((Q(1), Q(1)), (Q(1), Q(0))):
    full, (_, mu) = strict_complementarity(multiplier_polytope(S, x, v))
    M = minimal_identifiable_set(S, x, v)
    rep = graph_reduction_verify(S, M, x, v, budget=1300, seed=1)
    print(f"square v={fmt(v)}: strict complementarity {full}, multipliers {fmt(mu)},"
          f" M rows {M.supp_mu}, reduction {rep.verdict.value}")
