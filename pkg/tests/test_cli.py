import csv
import json
import math

import pytest

from holocurve.characteristics import CharReport
from holocurve.cli import main
from holocurve.interpolation import InterpProblem, InterpState
from holocurve.ostrowski import PhiProfile
from holocurve.rescaling import RescaleResult


def run(argv):
    return main([str(a) for a in argv])


@pytest.fixture
def curve_file(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"dimension": 1, "domain": "plane", "coordinates": ["1", "z"]}))
    return p


@pytest.fixture
def data_file(tmp_path):
    p = tmp_path / "d.json"
    zeros = [{"re": 2.0 ** k, "im": 0.0} for k in range(6)]
    poles = [{"re": -(2.0 ** k), "im": 0.0} for k in range(6)]
    p.write_text(json.dumps({"a": {"re": 1, "im": 0}, "m": 0, "zeros": zeros, "poles": poles}))
    return p


def test_char_roundtrip(tmp_path, curve_file):
    out = tmp_path / "rep.json"
    assert run(["char", "--curve", curve_file, "--r", "1,2,5", "--tol", "1e-8", "--out", out]) == 0
    rep = CharReport.from_json(json.loads(out.read_text()))
    assert rep.T[0] == pytest.approx(0.5 * math.log(2), abs=1e-8)


def test_eval_and_grid(tmp_path, capsys):
    assert run(["eval", "--curve", "builtin:exp", "--z", "0,1+2i"]) == 0
    obj = json.loads(capsys.readouterr().out)
    assert obj["values"][0]["sphderiv"] == pytest.approx(0.5)
    out = tmp_path / "g.csv"
    assert run(["sphderiv-grid", "--curve", "builtin:identity", "--region", "rect:-1,1,-1,1", "--grid", "8",
                "--out", out]) == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["x", "y", "value"] and len(rows) == 65
    assert float(rows[1][1]) == float(rows[2][1])  # row-major: x varies fastest


def test_order_and_rescale(tmp_path):
    out = tmp_path / "o.json"
    assert run(["order", "--curve", "builtin:exp", "--r0", "20", "--r1", "200", "--out", out]) == 0
    assert 0.95 <= json.loads(out.read_text())["order"] <= 1.05
    out = tmp_path / "r.json"
    assert run(["rescale", "--curve", "builtin:exp", "--n", "5", "--grid", "32", "--out", out]) == 0
    obj = json.loads(out.read_text())[0]
    res = RescaleResult.from_json(obj["result"])
    assert res.rho_n == pytest.approx(2.0) and obj["verify"]["ok"]


def test_ostrowski_and_phi(tmp_path, data_file):
    out = tmp_path / "c.json"
    assert run(["ostrowski-check", "--data", data_file, "--out", out]) == 0
    assert json.loads(out.read_text())["c4"] == pytest.approx(2.0)
    out = tmp_path / "phi.csv"
    assert run(["phi", "--data", data_file, "--out", out]) == 0
    rows = [tuple(map(float, r)) for r in list(csv.reader(out.open()))[1:]]
    prof = PhiProfile.from_rows(rows)
    assert prof.breakpoints.size == 6


def test_montel_and_lehto(tmp_path):
    out = tmp_path / "m.json"
    assert run(["montel", "--curve", "builtin:cstar_identity", "--targets", "0,inf,1", "--delta", "0.5",
                "--annulus", "0.5,4", "--out", out]) == 0
    assert json.loads(out.read_text())["max_count"] == 1
    out = tmp_path / "tab.csv"
    assert run(["lehto", "--t", "7.39,20.1,54.6", "--k-range", "40", "--out", out]) == 0
    sups = [float(r[1]) for r in list(csv.reader(out.open()))[1:]]
    assert min(sups) >= 0.5 - 1e-3


def test_interp_roundtrip(tmp_path):
    sol = tmp_path / "sol.json"
    assert run(["interp-solve", "--lattice", "3x3", "--dimension", "2", "--seed", "7", "--out", sol]) == 0
    obj = json.loads(sol.read_text())
    prob = InterpProblem.from_json(obj["problem"])
    state = InterpState.from_json(obj["solution"])
    assert len(prob.E) == 9 and state.max_residual < 1e-10
    prob_file = tmp_path / "p.json"
    prob_file.write_text(json.dumps(obj["problem"]))
    sol2 = tmp_path / "sol2.json"
    assert run(["interp-solve", "--problem", prob_file, "--tol", "1e-12", "--out", sol2]) == 0
    assert json.loads(sol2.read_text())["solution"] == obj["solution"]
    chk = tmp_path / "chk.json"
    assert run(["interp-check", "--solution", sol, "--grid", "32", "--out", chk]) == 0
    assert json.loads(chk.read_text())["residual_ok"]


def test_deterministic_output(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        assert run(["interp-solve", "--lattice", "2x2", "--seed", "3", "--out", out]) == 0
    assert a.read_text() == b.read_text()


def test_chpm(tmp_path):
    out = tmp_path / "h.json"
    assert run(["chpm", "--curve", "builtin:exp:a=3", "--out", out]) == 0
    assert not json.loads(out.read_text())["checks"]["log_gradient"]


def test_exit_codes(tmp_path, capsys):
    assert run(["nosuch"]) == 64
    assert run(["char", "--bogus-flag"]) == 64
    err = capsys.readouterr().err
    assert json.loads(err.strip().splitlines()[-1])["exit_code"] == 64
    assert run(["char", "--curve", tmp_path / "missing.json", "--r", "1"]) == 2
    assert run(["eval", "--curve", "builtin:identity", "--z", "1+"]) == 2
    assert run(["char", "--curve", "builtin:identity", "--r", "1", "--tol", "-1"]) == 2
    assert run(["rescale", "--curve", "builtin:constant", "--n", "5"]) == 3
    assert run(["interp-solve", "--lattice", "2x2", "--K", "10"]) == 2
    err = capsys.readouterr().err
    assert json.loads(err.strip().splitlines()[-1])["error"] == "SparsenessError"
