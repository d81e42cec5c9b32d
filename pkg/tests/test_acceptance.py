"""Acceptance suite: one test per primary criterion.

Each test records a PASS/FAIL line; the lines are printed in the terminal
summary (see conftest.py) and when this file is run as a script.
"""
import functools
import time

import numpy as np
import pytest

from idkit.algorithms import proximal_point
from idkit.corpus import plq_corpus, polyhedral_function_corpus, polyhedron_corpus
from idkit.critcone import polyhedral_reduction_verify, tangential_approx_verify
from idkit.identify import (
    BoxDescriptor, Face, Verdict, graph_reduction_verify, identifiability_verify,
    minimal_identifiable_set, minimal_identifiable_set_f, minimal_identifiable_set_separable,
    necessity_verify, nonstabilization_demo, quartic_gradient_norm2, quartic_curve_limit,
)
from idkit.manifold import (
    active_manifold, affine_identifiable_manifold, partial_smoothness_certificate,
    valley_inclusion_check,
)
from idkit.functions import active_sets_f
from idkit.numerics import Q, Rational, add, sub
from idkit.optimality import GrowthVerdict, growth_equivalence_check
from idkit.polyhedra import (
    active_set, argmax_face_bruteforce, cone_member, cones_equal, gencone_to_polyhedron,
    normal_cone, polar, project, tangent_cone,
)

RESULTS = []
EXACT_SAMPLES = 10_000


def criterion(number, title):
    def wrap(fn):
        @functools.wraps(fn)
        def run(*a, **kw):
            t0 = time.perf_counter()
            try:
                detail = fn(*a, **kw) or ""
            except AssertionError as exc:
                line = f"CRITERION {number:>2} FAIL  {title}  ({exc})"
                RESULTS.append(line)
                print(line)
                raise
            line = (f"CRITERION {number:>2} PASS  {title}  "
                    f"[{time.perf_counter() - t0:.1f}s] {detail}").rstrip()
            RESULTS.append(line)
            print(line)
        return run
    return wrap


@functools.lru_cache(maxsize=None)
def corpus():
    return polyhedron_corpus(200, seed=0)


def test_corpus_shape():
    inst = corpus()
    assert len(inst) >= 200
    assert all(2 <= c.Q.n <= 4 and c.Q.m <= 8 for c in inst)
    assert any(c.ri for c in inst) and any(not c.ri for c in inst)


# ---------------------------------------------------------------------------

@criterion(1, "quartic limits n^2/(n^4+1) within 1e-9, |x| <= 1e-3")
def test_c01_quartic_limits():
    t0 = time.perf_counter()
    worst = []
    for n in range(1, 11):
        lim, seq, exact2 = quartic_curve_limit(n, x_max=Rational(1, 1000))
        # independent check of the last sample against the exact curve formula
        x = Rational(1, 1000) / (1 << 39)
        assert quartic_gradient_norm2(x, x * x / n) == (4 * n * n * x * x + 1) / (n * n + 1)
        worst.append((n, lim, n * n / (n ** 4 + 1)))
    elapsed = time.perf_counter() - t0
    assert elapsed < 1.0, f"runtime {elapsed:.2f}s"
    bad = [(n, round(lim, 6), round(t, 6)) for n, lim, t in worst if abs(lim - t) > 1e-9]
    assert not bad, f"observed vs stated limit differ for (n, observed, stated) = {bad[:3]}..."


@criterion(2, "face-oracle equivalence on 200 polyhedra (< 60 s)")
def test_c02_face_oracle():
    t0 = time.perf_counter()
    for inst in corpus():
        M = minimal_identifiable_set(inst.Q, inst.xbar, inst.vbar)
        oracle = argmax_face_bruteforce(inst.Q, inst.vbar)
        assert M.supp_mu == oracle.tight, f"instance seed {inst.seed}"
    elapsed = time.perf_counter() - t0
    assert elapsed < 60, f"runtime {elapsed:.1f}s"
    return f"{len(corpus())} instances"


@criterion(3, "polarity and projection KKT, >= 1e4 exact checks")
def test_c03_polarity_and_kkt():
    checks = 0
    for inst in corpus():
        rng = np.random.default_rng(inst.seed)
        n = inst.Q.n
        pts = [inst.xbar]
        for _ in range(50):
            z = add(inst.xbar, tuple(Q(int(t)) / 8 for t in rng.integers(-24, 25, size=n)))
            y = project(inst.Q, z)
            assert inst.Q.contains(y), f"projection left Q (seed {inst.seed})"
            assert cone_member(sub(z, y), normal_cone(inst.Q, y)), f"KKT (seed {inst.seed})"
            checks += 2
            pts.append(y)
        for y in pts[:6]:
            T = tangent_cone(inst.Q, y)
            N = normal_cone(inst.Q, y)
            assert cones_equal(polar(N), T), f"polarity (seed {inst.seed})"
            assert cones_equal(gencone_to_polyhedron(N), polar_of(T)), f"polarity (seed {inst.seed})"
            checks += 2
    assert checks >= 10_000, f"only {checks} checks"
    return f"{checks} checks"


def polar_of(T):
    from idkit.polyhedra import GenCone

    return gencone_to_polyhedron(GenCone.cone(T.A, T.n))


@criterion(4, "graph reduction: minimal face PASS, smaller face FAIL (1e4 samples)")
def test_c04_graph_reduction():
    smaller = 0
    for inst in corpus():
        M = minimal_identifiable_set(inst.Q, inst.xbar, inst.vbar)
        rep = graph_reduction_verify(inst.Q, M, inst.xbar, inst.vbar, EXACT_SAMPLES, inst.seed)
        assert rep.verdict is Verdict.PASS and not rep.violations, f"seed {inst.seed}: {rep.verdict}"
        own = active_set(inst.Q, inst.xbar)
        small = Face(inst.Q, (), own)
        if inst.ri:
            # the minimal face is already the face of xbar: nothing strictly smaller
            assert all(small.contains(x) == M.contains(x) for x in _probe(inst))
            continue
        rep = graph_reduction_verify(inst.Q, small, inst.xbar, inst.vbar, EXACT_SAMPLES,
                                     inst.seed, stop_on_fail=True)
        assert rep.verdict is Verdict.FAIL and rep.violations, f"seed {inst.seed}: {rep.verdict}"
        smaller += 1
    return f"{smaller} smaller-face FAILs"


def _probe(inst):
    rng = np.random.default_rng(inst.seed + 1)
    n = inst.Q.n
    pts = []
    for _ in range(20):
        z = add(inst.xbar, tuple(Q(int(t)) / 16 for t in rng.integers(-8, 9, size=n)))
        pts.append(project(inst.Q, z))
    return pts


@criterion(5, "polyhedral reduction with instance delta (1e4 samples)")
def test_c05_polyhedral_reduction():
    for inst in corpus():
        rep = polyhedral_reduction_verify(inst.Q, inst.xbar, inst.vbar, None, EXACT_SAMPLES,
                                          inst.seed)
        assert rep.verdict is Verdict.PASS, f"seed {inst.seed}: {rep.verdict}"
        assert rep.samples_total >= EXACT_SAMPLES // 2, f"seed {inst.seed}: few samples"


@criterion(6, "tangential approximation on every minimal face")
def test_c06_tangential():
    for inst in corpus():
        M = minimal_identifiable_set(inst.Q, inst.xbar, inst.vbar)
        assert tangential_approx_verify(inst.Q, M, inst.xbar, inst.vbar), f"seed {inst.seed}"


@criterion(7, "growth on M and ambient agree on 50 PLQ instances")
def test_c07_growth():
    from conftest import abs_plus_quad

    f = abs_plus_quad(1)
    M = BoxDescriptor((Q(0), None), (Q(0), None))
    cmp_ = growth_equivalence_check(f, M, (Q(0), Q(0)))
    assert cmp_.on_M.verdict is cmp_.ambient.verdict is GrowthVerdict.GROWTH
    assert cmp_.on_M.c == 1 and cmp_.ambient.c == 1, "fixture constant"
    verdicts = []
    for inst in plq_corpus(50, seed=2):
        M = minimal_identifiable_set_separable(inst.f, inst.xbar, inst.vbar)
        cmp_ = growth_equivalence_check(inst.f, M, inst.xbar)
        assert cmp_.agree, f"seed {inst.seed}: {cmp_.on_M.verdict} vs {cmp_.ambient.verdict}"
        verdicts.append(cmp_.ambient.verdict)
    return f"{verdicts.count(GrowthVerdict.GROWTH)} GROWTH / {len(verdicts)}"


@criterion(8, "finite identification by the proximal point method")
def test_c08_finite_identification():
    from conftest import abs_plq

    tr = proximal_point(abs_plq(), (Q(5),), 1, max_iter=20, M=BoxDescriptor((Q(0),), (Q(0),)))
    assert tr.identified_at == 5 and [x[0] for x in tr.iterates[:6]] == [5, 4, 3, 2, 1, 0]
    idx = []
    for inst in plq_corpus(50, seed=4, sc=True):
        assert inst.ri, f"seed {inst.seed} lacks strict complementarity"
        M = minimal_identifiable_set_separable(inst.f, inst.xbar, inst.vbar)
        rng = np.random.default_rng(inst.seed)
        x0 = add(inst.xbar, tuple(Q(int(t)) / 2 for t in rng.integers(-10, 11, size=inst.f.n)))
        tr = proximal_point(inst.f, x0, Rational(1, 2), max_iter=200, M=M)
        k0 = tr.identified_at
        assert k0 is not None and k0 < len(tr.iterates) - 1, f"seed {inst.seed}"
        assert all(M.contains(x) for x in tr.iterates[k0:])
        idx.append(k0)
    return f"max index {max(idx)}"


@criterion(9, "partial-smoothness conditions agree (ri / rb split)")
def test_c09_partial_smoothness():
    counts = {True: 0, False: 0}
    for inst in corpus():
        Q_, x, v = inst.Q, inst.xbar, inst.vbar
        if inst.ri:
            Maff = affine_identifiable_manifold(Q_, x, v)
            assert Maff is not None, f"seed {inst.seed}"
            Mface = minimal_identifiable_set(Q_, x, v)
        else:
            assert affine_identifiable_manifold(Q_, x, v) is None, f"seed {inst.seed}"
            Maff = active_manifold(Q_, x)
            Mface = Face(Q_, (), active_set(Q_, x))
        verdicts = (
            identifiability_verify(Q_, Maff, x, v, 1300, inst.seed).verdict,
            graph_reduction_verify(Q_, Mface, x, v, 1300, inst.seed, stop_on_fail=True).verdict,
            partial_smoothness_certificate(Q_, Maff, x, v, seed=inst.seed).overall,
            valley_inclusion_check(Q_, Maff, x, v, 1, None, 200, inst.seed).verdict,
        )
        expected = Verdict.PASS if inst.ri else Verdict.FAIL
        assert all(vd is expected for vd in verdicts), f"seed {inst.seed}: {verdicts}"
        counts[inst.ri] += 1
    return f"{counts[True]} ri PASS, {counts[False]} rb FAIL"


@criterion(10, "Lorentz nonstabilization witnesses down to 1e-6")
def test_c10_lorentz():
    rep = nonstabilization_demo("LORENTZ")
    assert rep["locally_minimal_identifiable_set"] == "NONE"
    assert Q(rep["eps"]) == Rational(1, 2) and Q(rep["eps_prime"]) == Rational(1, 4)
    radii = []
    for w in rep["witnesses"]:
        x = tuple(Q(t) for t in w["x"])
        # independent membership: angle to vbar measured by cosine, exact
        cos2 = x[0] ** 2 / sum(t * t for t in x)
        assert x[0] > 0 and cos2 == Rational(9, 64)
        assert w["in_M_eps"] and not w["in_M_eps_prime"]
        radii.append(Q(w["radius"]))
    assert min(radii) <= Rational(1, 10 ** 6)
    return f"{len(radii)} witnesses"


@criterion(11, "epigraphical coherence on the polyhedral-function corpus")
def test_c11_epigraph():
    n_checks = 0
    for inst in polyhedral_function_corpus(50, seed=1):
        f, x, v = inst.f, inst.xbar, inst.vbar
        M = minimal_identifiable_set_f(f, x, v)
        small = Face(f, *active_sets_f(f, x))
        for desc in (M, small):
            a = identifiability_verify(f, desc, x, v, 1300, inst.seed, route="function")
            b = identifiability_verify(f, desc, x, v, 1300, inst.seed, route="epigraph")
            assert a.verdict is b.verdict, f"seed {inst.seed}: {a.verdict} vs {b.verdict}"
            n_checks += 1
        a = necessity_verify(f, M, x, v, 650, inst.seed, route="function")
        b = necessity_verify(f, M, x, v, 650, inst.seed, route="epigraph")
        assert a.verdict is b.verdict, f"seed {inst.seed}: necessity {a.verdict} vs {b.verdict}"
        n_checks += 1
    return f"{n_checks} verdict pairs"


if __name__ == "__main__":
    import sys

    sys.path.insert(0, __file__.rsplit("/", 1)[0])
    for name, fn in sorted(globals().items()):
        if name.startswith("test_c"):
            try:
                fn()
            except AssertionError:
                pass
    print("\n".join(RESULTS))
