"""The maximum function: subdifferentials, multipliers and identifiable sets."""
from idkit.functions import PolyhedralFunction, subdifferential
from idkit.identify import (
    identifiability_verify, minimal_identifiable_set_f, multiplier_polytope,
    strict_complementarity,
)
from idkit.numerics import Q, Rational, format_rational

fmt = lambda v: "(" + ", ".join(format_rational(t) for t in v) + ")"  # noqa: E731

mx = PolyhedralFunction.max_function(3)
x = (Q(0),) * 3
print("subdifferential at 0:", [fmt(g) for g in subdifferential(mx, x).conv_gens])

half = Rational(1, 2)
for v in ((half, half, Q(0)), (Rational(1, 3),) * 3):
    full, (lam, _) = strict_complementarity(multiplier_polytope(mx, x, v))
    M = minimal_identifiable_set_f(mx, x, v)
    rep = identifiability_verify(mx, M, x, v, budget=1300, seed=0)
    print(f"v={fmt(v)}: lambda {fmt(lam)}, full support {full},"
          f" active pieces on M {M.supp_lambda}, identifiability {rep.verdict.value}")
    print("   (2, 2, 1) in M:", M.contains((Q(2), Q(2), Q(1))),
          " (2, 1, 1) in M:", M.contains((Q(2), Q(1), Q(1))))
