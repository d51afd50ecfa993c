import json
import os
import subprocess
import sys

import pytest

from gpme.cli import run

PHI2 = '{"family":"power_law","m":2}'


def _write(tmp_path, name, data):
    p = tmp_path / name
    p.write_text(data if isinstance(data, str) else json.dumps(data))
    return str(p)


@pytest.fixture
def graph_file(tmp_path):
    return _write(tmp_path, "g.json", {
        "nodes": [{"id": "a"}, {"id": "b"}, {"id": "c", "kappa": 0.5}],
        "edges": [{"u": "a", "v": "b", "w": 1}, {"u": "b", "v": "c", "w": 2}]})


def _stderr_json(capsys):
    err = capsys.readouterr().err.strip().splitlines()[-1]
    return json.loads(err)


def test_resolve_half_line(tmp_path, capsys):
    g = _write(tmp_path, "g.json", {"0": 1.0})
    out = tmp_path / "u.json"
    assert run(["resolve", "--family", "half_line", "--phi", PHI2, "--lambda", "1",
                "--g", g, "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["u"]["0"] > data["u"]["1"] > 0
    assert data["diagnostics"]["monotone_certificate"] is True
    assert "level_differences" in data["diagnostics"]


def test_resolve_graph_file_to_stdout(tmp_path, graph_file, capsys):
    g = _write(tmp_path, "rhs.json", {"a": 3.0})
    assert run(["resolve", "--graph", graph_file, "--phi", PHI2, "--lambda", "0.5", "--g", g,
                "--tol", "1e-12"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["residual"] <= 3e-12 and set(data["u"]) == {"a", "b", "c"}


def test_evolve_refuses_sign_changing_on_star(tmp_path, capsys):
    u0 = _write(tmp_path, "u0.json", {"0": 1.0, "1": -1.0})
    code = run(["evolve", "--family", "star_infinite", "--phi", PHI2, "--u0", u0,
                "--T", "1", "--eps", "0.5"])
    assert code == 1
    err = _stderr_json(capsys)
    assert err["code"] == 1 and err["reason"] == "sign-changing data requires H1/H2/H3"


def test_malformed_graph_json(tmp_path, capsys):
    bad = _write(tmp_path, "bad.json", "{not json")
    g = _write(tmp_path, "rhs.json", {"a": 1})
    assert run(["resolve", "--graph", bad, "--phi", PHI2, "--lambda", "1", "--g", g]) == 2
    assert _stderr_json(capsys)["code"] == 2


@pytest.mark.parametrize("argv", [
    ["resolve", "--family", "half_line", "--phi", PHI2, "--lambda", "-1", "--g", "missing.json"],
    ["resolve", "--family", "moebius", "--phi", PHI2, "--lambda", "1", "--g", "x"],
    ["resolve", "--family", "half_line", "--phi", "{oops", "--lambda", "1", "--g", "x"],
    ["resolve", "--family", "half_line", "--phi", PHI2, "--lambda", "1", "--g", "does-not-exist.json"],
    ["resolve", "--phi", PHI2, "--lambda", "1", "--g", "x"],
    ["frobnicate"],
    ["check", "nope"],
])
def test_bad_inputs_exit_2(argv, capsys):
    assert run(argv) == 2
    err = _stderr_json(capsys)
    assert set(err) == {"code", "reason", "context"}


def test_evolve_json_and_csv(tmp_path, graph_file):
    u0 = _write(tmp_path, "u0.json", {"a": 1.0})
    forcing = _write(tmp_path, "f.json", {"kind": "piecewise_constant", "pieces": [
        {"t_start": 0, "t_end": 0.3, "values": {"b": 1.0}},
        {"t_start": 0.3, "t_end": 1, "values": {}}]})
    out, csv_path = tmp_path / "r.json", tmp_path / "r.csv"
    assert run(["evolve", "--graph", graph_file, "--phi", PHI2, "--u0", u0, "--forcing", forcing,
                "--T", "1", "--eps", "0.25", "--out", str(out), "--csv", str(csv_path)]) == 0
    data = json.loads(out.read_text())
    assert 0.3 in data["grid"] and data["diagnostics"]["classic"] is True
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "t,node,value" and len(lines) > 5


def test_evolve_mild(tmp_path, graph_file):
    u0 = _write(tmp_path, "u0.json", {"a": 1.0})
    out = tmp_path / "r.json"
    assert run(["evolve", "--graph", graph_file, "--phi", PHI2, "--u0", u0, "--T", "1",
                "--eps", "0.25", "--mild-tol", "1e-2", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["delta_estimate"][-1] <= 1e-2


def test_emit_plot(tmp_path, graph_file, capsys):
    u0 = _write(tmp_path, "u0.json", {"a": 1.0})
    out = tmp_path / "r.json"
    run(["evolve", "--graph", graph_file, "--phi", PHI2, "--u0", u0, "--T", "0.5", "--eps", "0.25",
         "--out", str(out)])
    assert run(["emit-plot", str(out)]) == 0
    assert capsys.readouterr().out.startswith("t,node,value\n0.0,a,1.0\n")
    assert run(["emit-plot", _write(tmp_path, "junk.json", {"x": 1})]) == 2


def test_check_accretivity_count(capsys):
    assert run(["check", "accretivity", "--seed", "7", "--cases", "500"]) == 0
    assert "passed=500 failed=0" in capsys.readouterr().out


def test_check_heat_order(capsys):
    assert run(["check", "heat-order"]) == 0
    out = capsys.readouterr().out
    line = [l for l in out.splitlines() if "measured order" in l][0]
    lo = float(line.split("min=")[1].split()[0])
    hi = float(line.split("max=")[1])
    assert 0.8 <= lo <= hi <= 1.2


def test_check_vacuous(capsys):
    assert run(["check", "comparison", "--cases", "0"]) == 0
    assert "passed=0 failed=0" in capsys.readouterr().out


def test_rhs_on_unknown_node(tmp_path, capsys):
    g = _write(tmp_path, "g.json", {"0": 1.0})
    assert run(["resolve", "--family", "binary_tree", "--phi", PHI2, "--lambda", "1", "--g", g]) == 2
    assert "not nodes of the graph" in _stderr_json(capsys)["reason"]


def test_output_is_deterministic(tmp_path):
    g = _write(tmp_path, "g.json", {"r": 1.0})
    outs = []
    for i in range(2):
        p = tmp_path / f"u{i}.json"
        run(["resolve", "--family", "binary_tree", "--phi", PHI2, "--lambda", "1", "--g", g, "--out", str(p)])
        outs.append(p.read_bytes())
    assert outs[0] == outs[1]


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "gpme", "check", "mass", "--seed", "1", "--cases", "2"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "mass: PASS" in proc.stdout


def test_log_env(tmp_path):
    g = _write(tmp_path, "g.json", {"0": 1.0})
    env = {**os.environ, "GPME_LOG": "info"}
    proc = subprocess.run([sys.executable, "-m", "gpme", "resolve", "--family", "half_line", "--phi", PHI2,
                           "--lambda", "1", "--g", g], capture_output=True, text=True, env=env)
    assert proc.returncode == 0 and "gpme INFO" in proc.stderr
