"""Quadratic growth on the identifiable set versus growth in the whole space."""
from idkit.functions import PLQFunction, PolyMap, make_univariate
from idkit.identify import minimal_identifiable_set_separable
from idkit.numerics import Q, Rational
from idkit.optimality import growth_equivalence_check, growth_transfer_check

absx = make_univariate([0], [(0, -1, 0), (0, 1, 0)])
for c in (Q(1), Rational(1, 4)):
    f = PLQFunction.separable([absx, make_univariate([], [(2 * c, 0, 0)])])
    x = (Q(0), Q(0))
    M = minimal_identifiable_set_separable(f, x, x)
    cmp_ = growth_equivalence_check(f, M, x)
    print(f"|x1| + {c} x2^2: on M {cmp_.on_M.verdict.value} c={cmp_.on_M.c},"
          f" ambient {cmp_.ambient.verdict.value} c={cmp_.ambient.c}")
    for a, name in ((Rational(1, 4), "|w|^2/4"), (Q(1), "|w|^2")):
        g = PolyMap.make([[(a, (2, 0)), (a, (0, 2))]], 2)
        rep = growth_transfer_check(f, M, x, g, budget=1000, seed=0)
        print(f"   transfer of {name}: {rep.verdict.value}")
