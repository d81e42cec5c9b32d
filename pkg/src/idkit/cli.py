"""Command-line front end: ``idkit analyze|identify|verify|run|demo``.

Problem files are JSON::

    {"kind": "POLYHEDRON" | "POLY_FUNCTION" | "PLQ" | "COMPOSITE" | "PPM",
     "payload": {...},
     "query": {"x": ["0", "1/2"], "v": ["1", "0"], "options": {...}}}

Exit codes: 0 success or PASS, 1 FAIL, 2 INCONCLUSIVE, 3 usage or parse error.
"""
from __future__ import annotations

import argparse
import enum
import json
import sys

from . import algorithms, critcone, identify, manifold, optimality
from .errors import IdkitError, ParseError
from .functions import (
    CompositeFunction,
    PLQFunction,
    PolyhedralFunction,
    PolyMap,
    active_sets_f,
    horizon_subdifferential,
    make_univariate,
    qualification_check,
    subdifferential,
    subdifferential_composite,
)
from .identify import Face, Verdict, VerifierReport
from .numerics import ZERO, format_rational, parse_rational
from .polyhedra import (
    PiecewisePolyhedralMapping,
    Polyhedron,
    active_set,
    normal_cone,
    ppm_minimal_identifiable,
    tangent_cone,
)

EXIT = {Verdict.PASS: 0, Verdict.FAIL: 1, Verdict.INCONCLUSIVE: 2, Verdict.NOT_APPLICABLE: 0}
USAGE = 3
KINDS = ("POLYHEDRON", "POLY_FUNCTION", "PLQ", "COMPOSITE", "PPM")


# ---------------------------------------------------------------------------
# Problem files
# ---------------------------------------------------------------------------


class Problem:
    def __init__(self, kind, host, x, v, options):
        self.kind = kind
        self.host = host
        self.x = x
        self.v = v
        self.options = options


def _ratvec(data, what):
    if data is None:
        return None
    try:
        return tuple(parse_rational(str(t)) for t in data)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad rational in {what}: {exc}") from None


def _plq_from_json(payload):
    if "separable" in payload:
        factors = [make_univariate(u.get("breaks", []), u["quads"], u.get("lo"), u.get("hi"))
                   for u in payload["separable"]]
        return PLQFunction.separable(factors)
    return PLQFunction.from_json(payload)


def _ppm_from_json(payload):
    n, m = int(payload["n"]), int(payload["m"])
    pieces = tuple(Polyhedron.from_json(p, n + m) for p in payload["pieces"])
    return PiecewisePolyhedralMapping(pieces, n, m)


def parse_problem(data) -> Problem:
    try:
        kind = str(data["kind"]).upper()
        payload = data["payload"]
    except (KeyError, TypeError):
        raise ParseError("problem file needs 'kind' and 'payload'") from None
    if kind not in KINDS:
        raise ParseError(f"unknown kind {kind!r}")
    query = data.get("query", {})
    try:
        if kind == "POLYHEDRON":
            host = Polyhedron.from_json(payload)
        elif kind == "POLY_FUNCTION":
            host = PolyhedralFunction.from_json(payload)
        elif kind == "PLQ":
            host = _plq_from_json(payload)
        elif kind == "COMPOSITE":
            host = CompositeFunction(PolyhedralFunction.from_json(payload["g"]),
                                     PolyMap.from_json(payload["F"], payload.get("n")))
        else:
            host = _ppm_from_json(payload)
    except ParseError:
        raise
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise ParseError(f"malformed {kind} payload: {exc}") from None
    x = _ratvec(query.get("x"), "query.x")
    v = _ratvec(query.get("v"), "query.v")
    n = host.n
    for vecname, vv in (("x", x), ("v", v)):
        if vv is not None and len(vv) != n:
            raise ParseError(f"query.{vecname} has length {len(vv)}, expected {n}")
    return Problem(kind, host, x, v, dict(query.get("options", {})))


def load_problem(path) -> Problem:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON in {path}: {exc}") from None
    return parse_problem(data)


# ---------------------------------------------------------------------------
# JSON helpers
# ---------------------------------------------------------------------------


def jsonable(obj):
    if isinstance(obj, enum.Enum):
        return obj.value
    if obj is None or isinstance(obj, (bool, int, float, str)):
        return obj
    if type(obj).__name__ == "mpq":
        return format_rational(obj)
    if hasattr(obj, "to_json"):
        return jsonable(obj.to_json())
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        return [jsonable(v) for v in obj]
    return str(obj)


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, indent=2)


def _require(p: Problem, *names):
    for nm in names:
        if getattr(p, nm) is None:
            raise ParseError(f"query.{nm} is required for this command")


def _gencone_json(C):
    return C.to_json()


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_analyze(p: Problem) -> dict:
    _require(p, "x")
    h, x = p.host, p.x
    out = {"kind": p.kind, "x": x}
    if p.kind == "POLYHEDRON":
        if not h.contains(x):
            from .errors import PointNotInSet
            raise PointNotInSet("x is not in the polyhedron")
        out["active_set"] = active_set(h, x)
        out["normal_cone"] = _gencone_json(normal_cone(h, x))
        out["tangent_cone"] = tangent_cone(h, x)
    elif p.kind in ("POLY_FUNCTION", "PLQ"):
        if not h.in_domain(x):
            from .errors import PointNotInDomain
            raise PointNotInDomain("x is outside dom f")
        out["value"] = h.value(x)
        out["subdifferential"] = _gencone_json(subdifferential(h, x))
        if p.kind == "POLY_FUNCTION":
            I, J = active_sets_f(h, x)
            out["active_pieces"], out["active_constraints"] = I, J
            out["horizon_subdifferential"] = _gencone_json(horizon_subdifferential(h, x))
        else:
            out["convex"] = h.convex
    elif p.kind == "COMPOSITE":
        out["value"] = h.value(x)
        out["qualification"] = qualification_check(h, x)
        out["subdifferential"] = _gencone_json(subdifferential_composite(h, x))
    else:
        _require(p, "v")
        out["in_graph"] = h.in_graph(x, p.v)
    return out


def _descriptor(p: Problem):
    """The query's M (``options.M``) or the minimal identifiable set."""
    given = p.options.get("M")
    if given is not None:
        return Face(p.host, tuple(given.get("supp_lambda", [])), tuple(given.get("supp_mu", [])))
    if p.kind == "POLYHEDRON":
        return identify.minimal_identifiable_set(p.host, p.x, p.v)
    if p.kind == "POLY_FUNCTION":
        return identify.minimal_identifiable_set_f(p.host, p.x, p.v)
    if p.kind == "PLQ" and p.host.factors is not None:
        return identify.minimal_identifiable_set_separable(p.host, p.x, p.v)
    if p.kind == "PLQ" and p.host.source is not None:
        return identify.minimal_identifiable_set_f(p.host.source, p.x, p.v)
    raise ParseError(f"no identifiable-set construction for kind {p.kind}")


def cmd_identify(p: Problem) -> dict:
    _require(p, "x", "v")
    out = {"kind": p.kind}
    if p.kind == "PPM":
        U = ppm_minimal_identifiable(p.host, p.x, p.v)
        out["minimal_identifiable_set"] = {"variant": "POLYHEDRON_UNION",
                                           "members": [P.to_json() for P in U.polyhedra]}
        return out
    if p.kind == "COMPOSITE":
        out["minimal_identifiable_set"] = identify.minimal_identifiable_set_composite(p.host, p.x, p.v)
        return out
    if p.kind in ("POLYHEDRON", "POLY_FUNCTION"):
        ms = identify.multiplier_polytope(p.host, p.x, p.v)
        full, (lam, mu) = identify.strict_complementarity(ms)
        out["multiplier_polytope"] = {"I": ms.I, "J": ms.J, "polyhedron": ms.Lambda}
        out["strict_complementarity"] = full
        out["witness"] = {"lambda": lam, "mu": mu}
    out["minimal_identifiable_set"] = _descriptor(p)
    if p.options.get("manifold") and p.kind in ("POLYHEDRON", "POLY_FUNCTION"):
        M = manifold.affine_identifiable_manifold(p.host, p.x, p.v)
        out["affine_manifold"] = M
        if M is not None and p.kind == "POLYHEDRON":
            out["partial_smoothness"] = manifold.partial_smoothness_certificate(p.host, M, p.x, p.v)
    return out


VERIFY = ("IDENT", "NECESSITY", "REDUCTION", "CRITCONE", "VALLEY", "RANK", "GROWTH")


def cmd_verify(p: Problem, which: str, seed: int, budget: int, radius=None):
    which = which.upper()
    if which not in VERIFY:
        raise ParseError(f"--which must be one of {', '.join(VERIFY)}")
    r = None if radius is None else parse_rational(str(radius))
    if which == "GROWTH":
        _require(p, "x")
        zero = tuple(ZERO for _ in p.x)
        p.v = zero if p.v is None else p.v
        M = _descriptor(p)
        cmp_ = optimality.growth_equivalence_check(p.host, M, p.x, budget, seed)
        if cmp_.agree:
            rep = VerifierReport(Verdict.PASS, len(cmp_.on_M.radii) * 2, [], cmp_.ambient.radii, seed)
        else:
            wit = [w for w in cmp_.ambient.witnesses + cmp_.on_M.witnesses if w is not None][:1]
            rep = VerifierReport(Verdict.FAIL if wit else Verdict.INCONCLUSIVE, 2 * len(cmp_.on_M.radii),
                                 [{"x": w, "v": zero} for w in wit], cmp_.ambient.radii, seed)
        rep.notes.update({"on_M": cmp_.on_M.to_json(), "ambient": cmp_.ambient.to_json()})
        return rep
    _require(p, "x", "v")
    route = p.options.get("route", "function")
    if which == "IDENT":
        return identify.identifiability_verify(p.host, _descriptor(p), p.x, p.v, budget, seed,
                                               r0=r, route=route)
    if which == "NECESSITY":
        return identify.necessity_verify(p.host, _descriptor(p), p.x, p.v, budget, seed,
                                         r0=r, route=route)
    if p.kind != "POLYHEDRON":
        raise ParseError(f"{which} needs a POLYHEDRON problem")
    if which == "REDUCTION":
        return identify.graph_reduction_verify(p.host, _descriptor(p), p.x, p.v, budget, seed, r0=r)
    if which == "CRITCONE":
        return critcone.polyhedral_reduction_verify(p.host, p.x, p.v, r, budget, seed)
    if which == "VALLEY":
        lam = p.options.get("lambda", 1)
        return manifold.valley_inclusion_check(p.host, _descriptor(p), p.x, p.v, lam, r,
                                               min(budget, 2000), seed)
    rep = manifold.projection_rank_check(p.host, p.x, p.v, p.options.get("lambda", 1),
                                         budget=min(budget, 500), seed=seed)
    return rep


def cmd_run(p: Problem, method: str):
    method = method.upper()
    o = p.options
    x0 = _ratvec(o.get("x0"), "options.x0") or p.x
    if x0 is None:
        raise ParseError("options.x0 (or query.x) is required")
    max_iter = int(o.get("max_iter", 100))
    tol = o.get("tol", "0")
    M = None
    if p.x is not None and p.v is not None:
        M = _descriptor(p)
    if method == "PROX":
        if p.kind not in ("POLY_FUNCTION", "PLQ"):
            raise ParseError("PROX needs a POLY_FUNCTION or PLQ problem")
        tr = algorithms.proximal_point(p.host, x0, o.get("lambda", 1), max_iter, tol, M)
    elif method == "PROJGRAD":
        if p.kind != "POLYHEDRON" or "h" not in o:
            raise ParseError("PROJGRAD needs a POLYHEDRON problem and options.h")
        h = PolyMap.from_json(o["h"], p.host.n)
        tr = algorithms.projected_gradient(h, p.host, x0, o.get("step", "1/2"), max_iter, tol, M)
    else:
        raise ParseError("--method must be PROX or PROJGRAD")
    return tr


DEMOS = ("lorentz", "quartic", "orthant", "square", "maxfun")


def cmd_demo(name: str, seed: int = 0) -> dict:
    from .numerics import Q

    name = name.lower()
    if name == "lorentz":
        rep = identify.nonstabilization_demo("LORENTZ")
        rep["chain"] = critcone.lorentz_chain(seed=seed)
        return rep
    if name == "quartic":
        return identify.nonstabilization_demo("QUARTIC")
    if name == "orthant":
        O = Polyhedron.orthant(2)
        x, v = (Q(0), Q(0)), (Q(-1), Q(0))
        M = identify.minimal_identifiable_set(O, x, v)
        return {"example": "orthant", "x": x, "v": v, "minimal_identifiable_set": M,
                "critical_cone": critcone.critical_cone(O, x, v),
                "chain": critcone.critical_cone_chain(O, x, v, [Q("1/2"), Q("1/4"), Q("1/8")]),
                "identifiability": identify.identifiability_verify(O, M, x, v, 1300, seed).verdict}
    if name == "square":
        S = Polyhedron.box([0, 0], [1, 1])
        x = (Q(1), Q(1))
        rows = []
        for v in ((Q(1), Q(1)), (Q(1), Q(0))):
            M = identify.minimal_identifiable_set(S, x, v)
            rows.append({"v": v, "minimal_identifiable_set": M,
                         "strict_complementarity": identify.strict_complementarity(
                             identify.multiplier_polytope(S, x, v))[0],
                         "reduction": identify.graph_reduction_verify(S, M, x, v, 1300, seed).verdict})
        return {"example": "square", "x": x, "cases": rows}
    if name == "maxfun":
        f = PolyhedralFunction.max_function(2)
        x = (Q(0), Q(0))
        rows = []
        for v in ((Q("1/2"), Q("1/2")), (Q(1), Q(0))):
            M = identify.minimal_identifiable_set_f(f, x, v)
            rows.append({"v": v, "minimal_identifiable_set": M,
                         "identifiability": identify.identifiability_verify(f, M, x, v, 650, seed).verdict})
        return {"example": "maxfun", "x": x, "subdifferential": _gencone_json(subdifferential(f, x)),
                "cases": rows}
    raise ParseError(f"unknown demo {name!r}; choose from {', '.join(DEMOS)}")


# ---------------------------------------------------------------------------
# Rendering and entry point
# ---------------------------------------------------------------------------


def _verdict_of(result):
    if isinstance(result, VerifierReport):
        return result.verdict
    if isinstance(result, dict) and isinstance(result.get("verdict"), Verdict):
        return result["verdict"]
    return None


def render(title: str, result) -> str:
    data = jsonable(result)
    lines = [title]
    if isinstance(data, dict):
        for k in sorted(data):
            val = data[k]
            text = json.dumps(val, sort_keys=True)
            if len(text) > 100:
                text = text[:97] + "..."
            lines.append(f"  {k:<28} {text}")
    else:
        lines.append(json.dumps(data))
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="problem file (JSON)")
    common.add_argument("--seed", type=int, default=None, help="random seed (required for sampling)")
    common.add_argument("--budget", type=int, default=10_000, help="sample budget")
    common.add_argument("--radius", default=None, help="initial radius / locality (rational)")
    common.add_argument("--json", dest="json_path", default=None, help="write the JSON report here")
    ap = argparse.ArgumentParser(prog="idkit", description=__doc__.splitlines()[0], parents=[common])
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("analyze", parents=[common], help="active sets, cones, subdifferentials")
    sub.add_parser("identify", parents=[common], help="multipliers and identifiable sets")
    v = sub.add_parser("verify", parents=[common], help="sampled verifiers")
    v.add_argument("--which", required=True, type=str.upper, choices=VERIFY)
    r = sub.add_parser("run", parents=[common], help="run an algorithm and monitor identification")
    r.add_argument("--method", required=True, type=str.upper, choices=("PROX", "PROJGRAD"))
    d = sub.add_parser("demo", parents=[common], help="narrative examples")
    d.add_argument("name", choices=DEMOS)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else USAGE
    try:
        if args.command == "demo":
            result = cmd_demo(args.name, args.seed or 0)
        else:
            if not args.input:
                raise ParseError("--input is required")
            p = load_problem(args.input)
            if args.command == "analyze":
                result = cmd_analyze(p)
            elif args.command == "identify":
                result = cmd_identify(p)
            elif args.command == "verify":
                if args.seed is None:
                    raise ParseError("--seed is required for sampled verification")
                result = cmd_verify(p, args.which, args.seed, args.budget, args.radius)
            else:
                result = cmd_run(p, args.method)
    except (IdkitError, ValueError) as exc:
        print(f"idkit: error: {exc}", file=sys.stderr)
        return USAGE
    text = dumps(result)
    if args.json_path:
        with open(args.json_path, "w") as fh:
            fh.write(text + "\n")
    print(render(f"idkit {args.command}", result))
    verdict = _verdict_of(result)
    return EXIT.get(verdict, 0) if verdict is not None else 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
