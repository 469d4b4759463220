import json

import pytest
from gmpy2 import mpq

from vishik.cli import main, run_task, selftest
from vishik.errors import BasePointNotOnSurfaceError, ProblemError
from vishik.problem import parse_polynomial, parse_problem

from helpers import const, var

FOLD = json.dumps({
    "variables": ["x", "y"],
    "field": ["y", "1"],
    "surface": "x",
    "point": [0, 0],
    "order": 6,
    "mode": "exact",
})

TRANSVERSAL = json.dumps({"variables": ["x", "y"], "field": ["1", "0"], "surface": "x", "point": [0, 0]})


def _write(tmp_path, text, name="p.json"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


# parser

def test_parse_polynomial_grammar():
    x, y = var(0, 2), var(1, 2)
    got = parse_polynomial("3/4*x^2 - (x + y)*y + 2", ["x", "y"])
    assert got == x * x * mpq(3, 4) - (x + y) * y + 2
    assert parse_polynomial("-x^3", ["x", "y"]) == -(x**3)


@pytest.mark.parametrize("text", ["2x", "x y", "x^", "x + ", "(x", "z", "x^1/2", "x/y"])
def test_parse_polynomial_rejects(text):
    with pytest.raises(ProblemError):
        parse_polynomial(text, ["x", "y"])


def test_parse_polynomial_degree_limit():
    with pytest.raises(ProblemError):
        parse_polynomial("x^7", ["x"], order=6)


def test_parse_fold_problem():
    spec = parse_problem(FOLD)
    assert spec.X.components == (var(1, 2), const(1, 2)) and spec.h == var(0, 2)


def test_base_point_off_surface():
    data = json.loads(FOLD)
    data["surface"] = "x - 1"
    with pytest.raises(BasePointNotOnSurfaceError):
        parse_problem(json.dumps(data))


def test_translation_to_the_base_point():
    data = {"variables": ["a", "b", "c"], "field": ["b", "c", "1"], "surface": "a - 1", "point": [1, 0, 0]}
    spec = parse_problem(json.dumps(data))
    assert spec.h == var(0, 3)
    out, _ = run_task("classify", spec)
    assert out["k"] == 2 and out["simple"]


def test_syntax_error_location():
    text = '{\n  "variables": ["x", "y"],\n  "field": ["y", "1 +* x"],\n  "surface": "x",\n  "point": [0, 0]\n}'
    with pytest.raises(ProblemError) as info:
        parse_problem(text)
    assert info.value.line == 3
    # the column points inside the offending string
    assert text.splitlines()[2][info.value.column - 1] == "*"


def test_invalid_json_location():
    with pytest.raises(ProblemError) as info:
        parse_problem('{"variables": [,]}')
    assert info.value.line == 1 and info.value.column == 16


def test_decimals_only_in_float_mode():
    data = json.loads(FOLD)
    data["field"] = ["0.5*y", "1"]
    with pytest.raises(ProblemError):
        parse_problem(json.dumps(data))
    data["mode"] = "float"
    spec = parse_problem(json.dumps(data))
    assert spec.X[0].coefficient((0, 1)) == 0.5


def test_unknown_key_rejected():
    data = json.loads(FOLD)
    data["extra"] = 1
    with pytest.raises(ProblemError):
        parse_problem(json.dumps(data))


def test_round_trip():
    data = {"variables": ["u", "v", "w"], "field": ["v - 1/3*u^2", "w", "1 + u*v"],
            "surface": "u + v^2 - 2", "point": [2, 0, 5], "order": 5, "mode": "exact"}
    spec = parse_problem(json.dumps(data))
    again = parse_problem(spec.serialize())
    assert again.X == spec.X and again.h == spec.h and again.point == spec.point


# command line

def test_cli_classify_fold(tmp_path, capsys):
    assert main([_write(tmp_path, FOLD)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["k"] == 1 and out["simple"] is True


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["--task", "normal-form", _write(tmp_path, TRANSVERSAL)]) == 2
    assert "not a contact" in capsys.readouterr().err
    assert main([_write(tmp_path, "{not json")]) == 1
    assert main([str(tmp_path / "missing.json")]) == 1
    assert main([]) == 1
    cusp = json.dumps({"variables": ["a", "b", "c"], "field": ["b", "c", "1"], "surface": "a", "point": [0, 0, 0]})
    assert main(["--task", "half-map", _write(tmp_path, cusp)]) == 2


@pytest.mark.parametrize("task", ["classify", "normal-form", "half-map", "verify"])
def test_cli_output_is_deterministic(tmp_path, task):
    path = _write(tmp_path, FOLD)
    outs = []
    for i in range(2):
        target = str(tmp_path / f"out{i}.json")
        assert main(["--task", task, "--out", target, path]) == 0
        outs.append(open(target, "rb").read())
    assert outs[0] == outs[1]


def test_cli_verify_reports_ok(tmp_path, capsys):
    assert main(["--task", "verify", _write(tmp_path, FOLD)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["residuals"]["ok"] is True


def test_cli_order_and_mode_overrides(tmp_path, capsys):
    assert main(["--task", "normal-form", "--order", "4", "--mode", "float", _write(tmp_path, FOLD)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["psi"][0]["order"] == 4 and out["psi"][0]["mode"] == "float"


def test_cli_selftest_small(capsys):
    assert main(["--selftest", "--cases", "1"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["passed"] == 5 and out["failed"] == 0
    assert [(c["k"], c["m"]) for c in out["cases"]] == [(1, 2), (1, 3), (2, 3), (2, 4), (3, 4)]


def test_selftest_parallel_matches_serial():
    assert selftest(3, 1, jobs=2) == selftest(3, 1, jobs=1)
