import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from nlos_locate.cli import SWEEP_HEADER, emit_csv, format_sweep_csv, read_sweep_csv, run
from nlos_locate.simkit import CellSummary, SweepResult, resolve_workers


def test_emit_empty(tmp_path):
    emit_csv(SweepResult(), tmp_path / "s.csv")
    assert (tmp_path / "s.csv").read_bytes() == (",".join(SWEEP_HEADER) + "\n").encode()


def test_emit_formatting(tmp_path):
    res = SweepResult({(3, "SRNI"): CellSummary(5.0, 81.0, float("nan"), 10, 0),
                       (0.5, "LS"): CellSummary(1234.56789, 1.0, 0.00123456789, 10, 2)})
    text = format_sweep_csv(res)
    assert "\r" not in text
    lines = text.splitlines()
    assert lines[1] == "0.5,LS,1234.57,1.00000,0.00123457,10,2"
    assert lines[2] == "3,SRNI,5.00000,81.0000,nan,10,0"


def test_csv_roundtrip_is_byte_identical(tmp_path):
    res = SweepResult({(p, a): CellSummary(1 / (p + 3), 219.0, float("nan"), 7, 1)
                       for p in (0, 10, 20) for a in ("BB", "SRNI")})
    emit_csv(res, tmp_path / "a.csv")
    emit_csv(read_sweep_csv(tmp_path / "a.csv"), tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_scenario_d(tmp_path, capsys):
    out = tmp_path / "d"
    assert run(["scenario", "d", "--seed", "42", "--trials", "20", "--out", str(out)]) == 0
    rows = list(csv.DictReader(open(out / "sweep.csv")))
    assert sorted({int(r["sweep_point"]) for r in rows}) == list(range(6))
    assert {r["algorithm"] for r in rows} == {"BB", "LS", "RWGH", "SRNI"}
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seed"] == 42 and manifest["config"]["trials"] == 20
    assert manifest["files"] == ["sweep.csv", "manifest.json"]
    assert "SRNI" in capsys.readouterr().out


def test_keep_trials_rmse_recomputable(tmp_path):
    out = tmp_path / "b"
    assert run(["scenario", "b", "--seed", "3", "--trials", "5", "--keep-trials", "--out", str(out)]) == 0
    trials = list(csv.DictReader(open(out / "trials.csv")))
    sweep = read_sweep_csv(out / "sweep.csv")
    for (point, algo), cell in sweep.cells.items():
        errs = [float(t["error_m"]) for t in trials
                if float(t["sweep_point"]) == point and t["algorithm"] == algo and t["failed"] == "0"]
        full = np.sqrt(np.mean(np.square(errs)))
        assert cell.rmse == pytest.approx(float("%#.6g" % full), rel=1e-9)


def test_rerun_from_manifest_is_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(["scenario", "c", "--seed", "9", "--trials", "3", "--out", str(a)]) == 0
    assert run(["custom", "--config", str(a / "manifest.json"), "--out", str(b)]) == 0
    assert (a / "sweep.csv").read_bytes() == (b / "sweep.csv").read_bytes()


def test_custom_config_file(tmp_path):
    cfg = {"scenario_id": "Custom", "sweep_parameter": "sigma", "sweep": [0, 30],
           "stations": [[0, 0], [5000, 0], [0, 5000], [5000, 5000], [2500, -3000]],
           "ms_true": [1000, 1500], "nl_template": [0, 0, 300, 0, 0], "trials": 4, "seed": 11,
           "algorithms": ["LS", "SRNI"]}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    assert run(["custom", "--config", str(path), "--out", str(tmp_path / "o")]) == 0
    rows = (tmp_path / "o" / "sweep.csv").read_text().splitlines()
    assert len(rows) == 5


def test_custom_missing_config(tmp_path, capsys):
    missing = tmp_path / "missing.json"
    assert run(["custom", "--config", str(missing)]) == 1
    assert str(missing) in capsys.readouterr().err


def test_custom_bad_config(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"scenario_id": "Custom", "sweep_parameter": "sigma", "sweep": []}))
    assert run(["custom", "--config", str(path)]) == 1


@pytest.mark.parametrize("argv", [[], ["scenario", "z"], ["localize", "--algo", "srni"], ["bogus"],
                                  ["scenario", "b", "--trials", "0"]])
def test_bad_arguments(argv):
    assert run(argv) == 1


def test_unwritable_output_is_execution_failure(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert run(["scenario", "d", "--trials", "1", "--out", str(blocker)]) == 2


def _write_inputs(tmp_path, stations, ranges, fmt="json"):
    s, r = tmp_path / f"st.{fmt}", tmp_path / f"r.{fmt}"
    if fmt == "json":
        s.write_text(json.dumps(np.asarray(stations).tolist()))
        r.write_text(json.dumps(np.asarray(ranges).tolist()))
    else:
        np.savetxt(s, stations, delimiter=",")
        np.savetxt(r, ranges, delimiter=",")
    return str(s), str(r)


@pytest.mark.parametrize("fmt", ["json", "csv"])
def test_localize_srni(tmp_path, capsys, stations, exact_ranges, fmt):
    r = exact_ranges.copy()
    r[0] += 1000
    s, rp = _write_inputs(tmp_path, stations, r, fmt)
    assert run(["localize", "--stations", s, "--ranges", rp, "--algo", "srni"]) == 0
    out = capsys.readouterr().out
    assert "position: (2000.000, 1000.000)" in out
    assert "M=1" in out and "valid=true" in out
    assert "NL=[1000.000, 0.000" in out


@pytest.mark.parametrize("algo", ["ls", "bb", "rwgh"])
def test_localize_other_algorithms(tmp_path, capsys, stations, exact_ranges, algo):
    s, rp = _write_inputs(tmp_path, stations, exact_ranges)
    assert run(["localize", "--stations", s, "--ranges", rp, "--algo", algo, "--init", "0,0"]) == 0
    assert capsys.readouterr().out.startswith("position: (")


def test_localize_errors(tmp_path):
    s, rp = _write_inputs(tmp_path, [(0, 0), (1000, 0), (3000, 0)], [500, 500, 2500])
    assert run(["localize", "--stations", s, "--ranges", rp, "--algo", "ls", "--init", "500,0"]) == 2
    assert run(["localize", "--stations", s, "--ranges", rp, "--algo", "ls", "--init", "nope"]) == 1
    assert run(["localize", "--stations", s, "--ranges", str(tmp_path / "none.json"), "--algo", "ls"]) == 1
    short = tmp_path / "short.json"
    short.write_text("[1, 2]")
    assert run(["localize", "--stations", s, "--ranges", str(short), "--algo", "ls"]) == 1


def test_worker_env(monkeypatch):
    monkeypatch.setenv("NLOS_LOCATE_THREADS", "3")
    assert resolve_workers() == 3
    assert resolve_workers(1) == 1
    monkeypatch.setenv("NLOS_LOCATE_THREADS", "0")
    assert resolve_workers() >= 1


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "nlos_locate", "custom", "--config", str(tmp_path / "x.json")],
                          capture_output=True, text=True)
    assert proc.returncode == 1
    assert "x.json" in proc.stderr
