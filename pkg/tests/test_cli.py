import json

import pytest

from idkit.cli import main, parse_problem
from idkit.errors import ParseError
from idkit.numerics import Q

ORTHANT = {"kind": "POLYHEDRON", "payload": {"A": [["-1", "0"], ["0", "-1"]], "b": ["0", "0"]},
           "query": {"x": ["0", "0"], "v": ["-1", "0"]}}
MX = {"kind": "POLY_FUNCTION",
      "payload": {"pieces": [{"a": ["1", "0", "0"], "b": "0"}, {"a": ["0", "1", "0"], "b": "0"},
                             {"a": ["0", "0", "1"], "b": "0"}], "constraints": []},
      "query": {"x": ["0", "0", "0"], "v": ["1/2", "1/2", "0"]}}
ABS = {"kind": "PLQ", "payload": {"separable": [{"breaks": ["0"], "quads": [["0", "-1", "0"], ["0", "1", "0"]]}]},
       "query": {"x": ["0"], "v": ["0"], "options": {"x0": ["5"], "max_iter": 10}}}
COMPOSITE = {"kind": "COMPOSITE",
             "payload": {"g": {"pieces": [{"a": ["1", "0"], "b": "0"}, {"a": ["0", "1"], "b": "0"}],
                               "constraints": []},
                         "F": {"polys": [{"terms": [{"coef": "1", "exps": [1]}]},
                                         {"terms": [{"coef": "-1", "exps": [1]}]}]}, "n": 1},
             "query": {"x": ["0"], "v": ["0"]}}
PPM = {"kind": "PPM", "payload": {"n": 1, "m": 1, "pieces": [
    {"A": [["1", "0"], ["-1", "0"], ["0", "1"]], "b": ["0", "0", "0"]},
    {"A": [["-1", "0"], ["0", "1"], ["0", "-1"]], "b": ["0", "0", "0"]}]},
    "query": {"x": ["0"], "v": ["0"]}}


def _file(tmp_path, data, name="p.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return str(p)


def _run(args, tmp_path):
    out = tmp_path / "out.json"
    code = main(args + ["--json", str(out)])
    return code, json.loads(out.read_text()) if out.exists() else None


def test_analyze_orthant(tmp_path):
    code, rep = _run(["analyze", "--input", _file(tmp_path, ORTHANT)], tmp_path)
    assert code == 0 and rep["active_set"] == [0, 1]
    assert sorted(rep["normal_cone"]["ray_gens"]) == [["-1", "0"], ["0", "-1"]]


def test_analyze_mx_simplex(tmp_path):
    code, rep = _run(["analyze", "--input", _file(tmp_path, MX)], tmp_path)
    assert code == 0 and len(rep["subdifferential"]["conv_gens"]) == 3


def test_analyze_composite_adjoint(tmp_path):
    code, rep = _run(["analyze", "--input", _file(tmp_path, COMPOSITE)], tmp_path)
    assert code == 0 and sorted(rep["subdifferential"]["conv_gens"]) == [["-1"], ["1"]]
    assert rep["qualification"] is True


def test_analyze_point_outside(tmp_path):
    bad = dict(ORTHANT, query={"x": ["-1", "0"]})
    assert main(["analyze", "--input", _file(tmp_path, bad)]) == 3


def test_identify(tmp_path):
    code, rep = _run(["identify", "--input", _file(tmp_path, MX)], tmp_path)
    assert code == 0 and rep["strict_complementarity"] is False
    assert rep["minimal_identifiable_set"]["supp_lambda"] == [0, 1]
    code, rep = _run(["identify", "--input", _file(tmp_path, PPM)], tmp_path)
    assert code == 0 and len(rep["minimal_identifiable_set"]["members"]) == 2


def test_identify_manifold(tmp_path):
    sq = {"kind": "POLYHEDRON", "payload": {"A": [["1", "0"], ["0", "1"]], "b": ["1", "1"]},
          "query": {"x": ["1", "1"], "v": ["1", "1"], "options": {"manifold": True}}}
    code, rep = _run(["identify", "--input", _file(tmp_path, sq)], tmp_path)
    assert rep["affine_manifold"]["basis"] == [] and rep["partial_smoothness"]["overall"] == "PASS"


def test_verify_exit_codes(tmp_path):
    f = _file(tmp_path, ORTHANT)
    code, rep = _run(["verify", "--which", "IDENT", "--input", f, "--seed", "0", "--budget", "650"], tmp_path)
    assert code == 0 and rep["verdict"] == "PASS"
    small = dict(ORTHANT, query=dict(ORTHANT["query"], options={"M": {"supp_mu": [0, 1]}}))
    f = _file(tmp_path, small, "s.json")
    code, rep = _run(["verify", "--which", "IDENT", "--input", f, "--seed", "0", "--budget", "650"], tmp_path)
    assert code == 1 and rep["violations"]


@pytest.mark.parametrize("which", ["NECESSITY", "REDUCTION", "CRITCONE", "VALLEY"])
def test_verify_polyhedral(which, tmp_path):
    f = _file(tmp_path, ORTHANT)
    code, rep = _run(["verify", "--which", which, "--input", f, "--seed", "1", "--budget", "300"], tmp_path)
    assert code == 0 and rep["verdict"] == "PASS"


def test_verify_growth(tmp_path):
    g = {"kind": "PLQ", "payload": {"separable": [
        {"breaks": ["0"], "quads": [["0", "-1", "0"], ["0", "1", "0"]]},
        {"breaks": [], "quads": [["2", "0", "0"]]}]}, "query": {"x": ["0", "0"]}}
    code, rep = _run(["verify", "--which", "GROWTH", "--input", _file(tmp_path, g), "--seed", "0"], tmp_path)
    assert code == 0 and rep["notes"]["on_M"]["c"] == "1" and rep["notes"]["ambient"]["verdict"] == "GROWTH"


def test_verify_needs_seed(tmp_path):
    assert main(["verify", "--which", "IDENT", "--input", _file(tmp_path, ORTHANT)]) == 3


def test_run_prox(tmp_path):
    code, rep = _run(["run", "--method", "PROX", "--input", _file(tmp_path, ABS)], tmp_path)
    assert code == 0 and rep["identified_at"] == 5
    assert rep["iterates"] == [["5"], ["4"], ["3"], ["2"], ["1"], ["0"], ["0"]]


def test_run_projgrad(tmp_path):
    p = dict(ORTHANT, query={"x": ["0", "1"], "v": ["-1", "0"],
                             "options": {"x0": ["1", "1"], "step": "1/2", "max_iter": 5,
                                         "h": {"polys": [{"terms": [{"coef": "1", "exps": [1, 0]}]}]}}})
    code, rep = _run(["run", "--method", "PROJGRAD", "--input", _file(tmp_path, p)], tmp_path)
    assert code == 0 and rep["identified_at"] == 2


@pytest.mark.parametrize("name", ["quartic", "orthant", "square", "maxfun"])
def test_demos(name, tmp_path):
    code, rep = _run(["demo", name, "--seed", "0"], tmp_path)
    assert code == 0 and rep


def test_demo_lorentz(tmp_path):
    code, rep = _run(["demo", "lorentz", "--seed", "0"], tmp_path)
    assert rep["locally_minimal_identifiable_set"] == "NONE"
    assert rep["chain"]["stabilized"] is False


def test_parse_errors(tmp_path):
    assert main(["analyze", "--input", _file(tmp_path, {"kind": "NOPE", "payload": {}})]) == 3
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    assert main(["analyze", "--input", str(p)]) == 3
    assert main(["analyze"]) == 3
    assert main(["nonsense"]) == 3
    with pytest.raises(ParseError):
        parse_problem(dict(ORTHANT, query={"x": ["0", "0", "0"]}))
    with pytest.raises(ParseError):
        parse_problem(dict(ORTHANT, query={"x": ["1/0", "0"]}))


def test_determinism_and_round_trip(tmp_path):
    f = _file(tmp_path, MX)
    outs = []
    for k in range(2):
        out = tmp_path / f"r{k}.json"
        main(["verify", "--which", "IDENT", "--input", f, "--seed", "5", "--budget", "260",
              "--json", str(out)])
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    rep = json.loads(outs[0])
    for r in rep["radii"]:
        assert str(Q(r).numerator) + ("/" + str(Q(r).denominator) if Q(r).denominator != 1 else "") == r
