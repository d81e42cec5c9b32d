"""Finite identification by the proximal point and projected gradient methods."""
from idkit.algorithms import projected_gradient, proximal_point
from idkit.functions import PLQFunction, PolyMap, make_univariate
from idkit.identify import BoxDescriptor, Face
from idkit.numerics import Q, Rational, format_rational
from idkit.polyhedra import Polyhedron

absf = PLQFunction.separable([make_univariate([0], [(0, -1, 0), (0, 1, 0)])])
tr = proximal_point(absf, (Q(5),), 1, max_iter=10, M=BoxDescriptor((Q(0),), (Q(0),)))
print("|x| from 5:", [format_rational(x[0]) for x in tr.iterates], "identified at", tr.identified_at)

# |x1| + x2^2 / 2 from (3, 1): x1 reaches 0 in three steps, x2 only halves
f = PLQFunction.separable([make_univariate([0], [(0, -1, 0), (0, 1, 0)]),
                           make_univariate([], [(1, 0, 0)])])
M = BoxDescriptor((Q(0), None), (Q(0), None))
tr = proximal_point(f, (Q(3), Q(1)), 1, max_iter=6, M=M)
for k, x in enumerate(tr.iterates):
    print(f"  k={k}  x=({format_rational(x[0])}, {format_rational(x[1])})  in M: {M.contains(x)}")
print("  identified at", tr.identified_at)

# projected gradient of <(1, 0), x> on the orthant
O = Polyhedron.orthant(2)
h = PolyMap.make([[(1, (1, 0))]], 2)
tr = projected_gradient(h, O, (Q(1), Q(1)), Rational(1, 2), max_iter=4, M=Face(O, (), (0,)))
print("projected gradient:", [tuple(map(format_rational, x)) for x in tr.iterates],
      "identified at", tr.identified_at)
