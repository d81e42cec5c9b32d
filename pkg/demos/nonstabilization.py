"""Two hosts without a locally minimal identifiable set."""
from idkit.critcone import lorentz_chain
from idkit.identify import nonstabilization_demo
from idkit.numerics import format_rational

rep = nonstabilization_demo("LORENTZ")
print("Lorentz cone, eps = 1/2 against eps' = 1/4")
for w in rep["witnesses"][::3]:
    print("  radius", w["radius"], "cosine to vbar", w["cosine"],
          "in M_eps", w["in_M_eps"], "in M_eps'", w["in_M_eps_prime"])
print("  corrected orientation:", rep["corrected_orientation"])
print("  locally minimal set:", rep["locally_minimal_identifiable_set"])

chain = lorentz_chain()
print("  sampled chain stabilizes:", chain["stabilized"])

rep = nonstabilization_demo("QUARTIC")
print("sqrt(x^4 + y^2) along y = x^2 / n")
for row in rep["curves"]:
    print(f"  n={row['n']:>2}  limit^2 {row['observed_limit_squared']:>6}"
          f"  limit {row['observed_limit']:.6f}  stated {row['stated_formula']:.6f}")
print("  diagonal gradients:", [f"{d['grad_norm']:.3g}" for d in rep["diagonal_sequence"][::3]])
