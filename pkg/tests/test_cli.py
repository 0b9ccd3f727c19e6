import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from exosc.cli import main
from exosc.cycles import LimitCycle
from exosc.singular import SingularCycle

HESTER = ["--system", "hester", "--alpha", "0.5", "--mu", "0.4", "--kappa", "0.2", "--gamma", "0.3"]
CORB = ["--system", "corbeiller", "--a", "1", "--b", "0.25"]


def _rows(path):
    with open(path) as fh:
        return [r for r in csv.reader(fh) if r and not r[0].startswith("#")]


def test_simulate_hester_loop_encloses_equilibrium(tmp_path):
    out, summ = tmp_path / "t.csv", tmp_path / "s.json"
    rc = main(["simulate", *HESTER, "--eps", "0.1", "--x0", "1", "--y0", "-1", "--t-end", "60",
               "--out", str(out), "--summary", str(summ)])
    assert rc == 0
    rows = _rows(out)
    assert rows[0] == ["t", "x", "y"]
    pts = np.array(rows[1:], dtype=float)[:, 1:]
    s = json.loads(summ.read_text())
    assert s["equilibrium"] == pytest.approx([0.32, 0.0], abs=1e-15)
    assert {e["id"] for e in s["events"]} == {"switch_up", "switch_down"}
    # the late part of the orbit winds once around (0.32, 0)
    late = pts[len(pts) // 2:] - [0.32, 0.0]
    turns = np.sum(np.angle(np.exp(1j * np.diff(np.arctan2(late[:, 1], late[:, 0]))))) / (2 * math.pi)
    assert abs(turns) >= 1


def test_simulate_invalid_gamma(tmp_path, capsys):
    argv = ["simulate", "--system", "hester", "--alpha", "0.5", "--mu", "0.4", "--kappa", "0.2",
            "--gamma", "1.5", "--eps", "0.1", "--out", str(tmp_path / "t.csv")]
    assert main(argv) == 2
    assert "gamma" in capsys.readouterr().err


def test_missing_params_and_bad_eps(capsys):
    assert main(["cycle", "--system", "hester", "--eps", "0.1"]) == 2
    assert main(["cycle", *CORB, "--eps", "-1"]) == 2


def test_numeric_failure_exit(tmp_path):
    argv = ["simulate", *CORB, "--eps", "0.01", "--t-end", "50", "--max-steps", "3",
            "--out", str(tmp_path / "t.csv"), "--summary", str(tmp_path / "s.json")]
    assert main(argv) == 3


def test_cycle_json_round_trip(tmp_path):
    out = tmp_path / "c.json"
    assert main(["cycle", *CORB, "--eps", "0.05", "--out", str(out)]) == 0
    d = json.loads(out.read_text())
    cyc = LimitCycle.from_json(d)
    assert json.loads(json.dumps(cyc.to_json())) == d


def test_singular_outputs(tmp_path):
    out, bu = tmp_path / "s.json", tmp_path / "b.csv"
    assert main(["singular", *CORB, "--out", str(out), "--blown-up", str(bu)]) == 0
    sc = SingularCycle.from_json(json.loads(out.read_text()))
    assert [lab for lab, _ in sc.segments] == ["Gamma1", "Gamma2"]
    rows = _rows(bu)
    assert rows[0] == ["segment", "chart", "c0", "c1", "c2", "c3"]
    assert {r[0] for r in rows[1:]} == {f"Gamma{i}" for i in range(2, 9)}
    assert main(["singular", *HESTER, "--out", str(out), "--blown-up", str(bu)]) == 2


def test_manifold_csv(tmp_path):
    out = tmp_path / "m.csv"
    assert main(["manifold", *CORB, "--eps", "0.01", "--x-min", "-0.5", "--x-max", "-0.1", "--n", "5",
                 "--order", "full", "--out", str(out)]) == 0
    rows = _rows(out)
    assert rows[0] == ["x", "y", "order"] and len(rows) == 6
    assert float(rows[1][1]) == pytest.approx(0.01 * 3.9297432688046173057 * 1.01, rel=1e-13)


def test_charts_verify(tmp_path):
    out = tmp_path / "r.json"
    assert main(["charts-verify", *CORB, "--seed", "42", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["ok"] and rep["failed"] == [] and rep["seed"] == 42


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# corbeiller manifold\nsystem = corbeiller\na = 1\nb = 0.25\neps = 0.01\nn = 3\n")
    out = tmp_path / "m.csv"
    assert main(["manifold", "--config", str(cfg), "--n", "4", "--out", str(out)]) == 0
    assert len(_rows(out)) == 5
    cfg.write_text("system = corbeiller\nbogus = 1\n")
    assert main(["manifold", "--config", str(cfg), "--out", str(out)]) == 2
    assert "bogus" in capsys.readouterr().err


def test_converge_csv(tmp_path):
    out = tmp_path / "c.csv"
    assert main(["converge", *CORB, "--eps-list", "0.1,0.05", "--out", str(out)]) == 0
    rows = _rows(out)
    assert rows[0] == ["eps", "hausdorff", "period", "log_floquet", "floor_flag"]
    h = [float(r[1]) for r in rows[1:]]
    assert h[0] > h[1]


def test_sweep_deterministic_and_resumable(tmp_path):
    argv = ["sweep", "--system", "hester", "--alpha", "0.5", "--mu", "0.4", "--gamma", "0.3",
            "--kappa", "0.5,0.8", "--eps", "0.1", "--n-seeds", "2", "--seed", "3", "--t-budget", "1000"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main([*argv, "--out", str(a)]) == 0
    text = a.read_text()
    assert text.splitlines()[0] == "# seed,3"
    rows = _rows(a)
    cls = {r[rows[0].index("kappa")]: r[rows[0].index("classification")] for r in rows[1:]}
    assert cls == {"0.5": "CycleFound", "0.80000000000000004": "ConvergesToEquilibrium"}
    # resume from a journal holding only the first grid point
    first = (tmp_path / "a.csv.journal").read_text().splitlines()[0]
    (tmp_path / "b.csv.journal").write_text(first + "\n")
    assert main([*argv, "--out", str(b)]) == 0
    assert b.read_text() == text


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "exosc", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "sweep" in r.stdout
