import json
import os
import subprocess
import sys

import pytest

from nilflow import cli


def run(argv, capsys):
    try:
        code = cli.main(argv)
    except SystemExit as exc:
        code = exc.code
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cf_golden(capsys):
    code, out, _ = run(["cf", "--alpha", "golden", "--depth", "10"], capsys)
    assert code == 0
    rows = [line.split(",") for line in out.splitlines()[1:] if not line.startswith("#")]
    assert len(rows) == 10 and all(r[1] == "1" for r in rows)
    assert [int(r[3]) for r in rows] == [1, 2, 3, 5, 8, 13, 21, 34, 55, 89]
    assert "max_quotient=1" in out


def test_cf_missing_alpha(capsys):
    code, _, err = run(["cf"], capsys)
    assert code == 2 and "alpha" in err


def test_cf_rational_warns(capsys):
    code, out, err = run(["cf", "--alpha", "0.5"], capsys)
    assert code == 0 and "rational" in (out + err).lower()


@pytest.mark.parametrize("cmd", ["cf", "growth", "cohomology", "ratner", "disjoint", "moebius",
                                 "flow", "batch", "replay"])
def test_help(cmd, capsys):
    code, out, _ = run([cmd, "--help"], capsys)
    assert code == 0 and "usage" in out


def test_disjoint_equal_powers(capsys):
    code, _, _ = run(["disjoint", "--alpha", "golden", "--p", "2", "--q", "2"], capsys)
    assert code == 3


def test_unknown_command(capsys):
    code, _, _ = run(["nope"], capsys)
    assert code == 2


def test_growth_outputs(tmp_path, capsys):
    code, out, _ = run(["growth", "--alpha", "golden", "--observable", "weyl11", "--out",
                        str(tmp_path), "--svg"], capsys)
    assert code == 0
    rep = json.loads((tmp_path / "growth.json").read_text())
    assert 0.4 <= rep["result"]["slope"] <= 0.6
    assert rep["decisions"]["growth_class"] == "sqrt"
    assert (tmp_path / "growth.csv").read_text().startswith("N,value\n")
    svg = (tmp_path / "growth.svg").read_text()
    assert svg.startswith("<svg") and "polyline" in svg and "slope" in svg
    assert not [p for p in os.listdir(tmp_path) if p.startswith(".")]


def test_growth_coboundary(capsys):
    code, out, _ = run(["growth", "--alpha", "golden", "--observable", "coboundary"], capsys)
    assert code == 0 and -0.1 <= json.loads(out)["slope"] <= 0.1


def test_growth_bad_N(capsys):
    code, _, _ = run(["growth", "--alpha", "golden", "--N", "1024,2048"], capsys)
    assert code == 2
    code, _, _ = run(["growth", "--alpha", "golden", "--N", "a,b"], capsys)
    assert code == 2


def test_growth_zero_observable(tmp_path, capsys):
    path = tmp_path / "zero.txt"
    path.write_text("# empty\n")
    code, _, _ = run(["growth", "--alpha", "golden", "--observable", str(path)], capsys)
    assert code == 3


def test_cohomology_roofs(capsys):
    code, out, _ = run(["cohomology", "--alpha", "golden", "--roof", "trivial"], capsys)
    assert code == 0 and json.loads(out)["decisions"]["trivial"] is True
    code, out, _ = run(["cohomology", "--alpha", "golden", "--roof", "nontrivial"], capsys)
    assert json.loads(out)["decisions"]["trivial"] is False


def test_ratner_deterministic_and_replay(tmp_path, capsys):
    argv = ["ratner", "--alpha", "golden", "--seed", "7", "--delta", "1e-2"]
    a = tmp_path / "a"
    assert run(argv + ["--out", str(a)], capsys)[0] == 0
    ja = (a / "ratner.json").read_bytes()
    assert run(argv + ["--out", str(a)], capsys)[0] == 0
    jb = (a / "ratner.json").read_bytes()
    assert ja == jb
    rep = json.loads(ja)
    assert rep["version"] and rep["config"]["seed"] == 7 and rep["config"]["delta"] == 1e-2
    assert (a / "ratner_trace.csv").read_text().startswith("n,a_n\n")
    code, out, _ = run(["replay", str(a / "ratner.json")], capsys)
    assert code == 0 and json.loads(out)["reproduced"] is True


def test_replay_detects_mismatch(tmp_path, capsys):
    run(["ratner", "--alpha", "golden", "--seed", "1", "--delta", "1e-2", "--out", str(tmp_path)],
        capsys)
    path = tmp_path / "ratner.json"
    rep = json.loads(path.read_text())
    rep["decisions"]["pass"] = [not v for v in rep["decisions"]["pass"]]
    path.write_text(json.dumps(rep))
    assert run(["replay", str(path)], capsys)[0] == 1


def test_strict_exit(capsys):
    argv = ["ratner", "--alpha", "golden", "--roof", "trivial", "--delta", "1e-2",
            "--max-steps", "1e5", "--strict"]
    assert run(argv, capsys)[0] == 4
    assert run(argv[:-1], capsys)[0] == 0


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# corpus entry\nalpha = golden\ndelta = 1e-2\nseed = 3\n")
    code, _, _ = run(["ratner", "--config", str(cfg), "--seed", "5", "--out", str(tmp_path)], capsys)
    assert code == 0
    rep = json.loads((tmp_path / "ratner.json").read_text())
    assert rep["config"]["seed"] == 5 and rep["config"]["alpha"] == "golden"
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = red\n")
    assert run(["ratner", "--config", str(bad)], capsys)[0] == 2


def test_flow_csv(capsys):
    code, out, _ = run(["flow", "--alpha", "golden", "--t-max", "5", "--dt", "1"], capsys)
    lines = out.splitlines()
    assert code == 0 and lines[0] == "t,x,y,s,N" and len(lines) == 7
    code, _, _ = run(["flow", "--alpha", "golden", "--s", "9"], capsys)
    assert code == 3


def test_batch_spec(tmp_path, capsys):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps([{"kind": "moebius", "seed": 2, "N": 1000},
                                {"kind": "disjoint_control", "seed": 1, "delta": 1e-2, "D_max": 1}]))
    code, _, _ = run(["batch", "--spec", str(spec), "--out", str(tmp_path)], capsys)
    assert code == 0
    rep = json.loads((tmp_path / "batch.json").read_text())
    assert rep["result"]["schema"] == "nilflow.batch/1" and len(rep["decisions"]["pass"]) == 2
    assert run(["replay", str(tmp_path / "batch.json")], capsys)[0] == 0
    assert run(["batch"], capsys)[0] == 2


def test_write_atomic(tmp_path):
    target = tmp_path / "x.txt"
    cli.write_atomic(str(target), "one\n")
    cli.write_atomic(str(target), "two\n")
    assert target.read_text() == "two\n" and os.listdir(tmp_path) == ["x.txt"]


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "nilflow", "cf", "--alpha", "silver", "--depth", "3"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "2" in res.stdout
