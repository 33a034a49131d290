import csv
import io
import json
import math
import subprocess
import sys

import pytest

from regmod import cli
from regmod.cli import CSV_COLUMNS, main

FAST = ["--steps", "5", "--samples", "400", "--seed", "1"]


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows_of(text):
    return list(csv.DictReader(io.StringIO(text)))


def write_spec(tmp_path, obj, name="spec.json"):
    path = tmp_path / name
    path.write_text(json.dumps(obj) if not isinstance(obj, str) else obj)
    return str(path)


QUADRANT = {"space": {"dim": 2},
            "sets": [{"kind": "halfspace", "normal": [0, -1], "offset": 0},
                     {"kind": "halfspace", "normal": [-1, 0], "offset": 0}],
            "point": [0, 0]}


def test_module_entry_point_reports_version():
    res = subprocess.run([sys.executable, "-m", "regmod", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("regmod ")


def test_estimate_csv_has_fixed_columns(capsys):
    code, out, _ = run(capsys, "estimate", "--example", "orth", "--q", "1", "--kinds", "sub",
                       "--format", "csv", *FAST)
    assert code == 0
    header = out.splitlines()[0].split(",")
    assert header == list(CSV_COLUMNS)
    (row,) = rows_of(out)
    assert row["kind"] == "zeta" and row["verdict"] == "positive"
    assert float(row["value"]) == pytest.approx(1 / math.sqrt(2), rel=0.02)
    assert row["wallclock_ms"] == ""


def test_timing_flag_fills_wallclock(capsys):
    code, out, _ = run(capsys, "estimate", "--example", "orth", "--q", "1", "--kinds", "semi",
                       "--format", "csv", "--timing", *FAST)
    assert code == 0 and float(rows_of(out)[0]["wallclock_ms"]) >= 0


def test_estimate_from_spec_file(capsys, tmp_path):
    path = write_spec(tmp_path, QUADRANT)
    code, out, _ = run(capsys, "estimate", "--spec", path, "--q", "1", "--kinds", "sub", *FAST)
    assert code == 0
    doc = json.loads(out)
    assert doc["tool"] == "regmod" and doc["failed"] is False
    assert doc["rows"][0]["value"] == pytest.approx(0.707107, rel=0.02)


def test_estimate_example_2_1_semi_is_zero(capsys):
    code, out, _ = run(capsys, "estimate", "--example", "2.1", "--q", "1", "--kinds", "semi",
                       "--format", "csv", *FAST)
    assert code == 0 and rows_of(out)[0]["verdict"] == "zero"


def test_estimate_numbers_use_six_significant_digits(capsys):
    code, out, _ = run(capsys, "estimate", "--example", "2.1", "--kinds", "theta_rho", "--rho", "0.6",
                       "--format", "csv", *FAST)
    assert code == 0
    assert rows_of(out)[0]["value"] == "0.16619"


def test_estimate_other_kinds(capsys):
    code, out, _ = run(capsys, "estimate", "--example", "orth", "--q", "1",
                       "--kinds", "dual_uniform,dual_subreg,map_sub,slope", "--format", "csv", *FAST)
    assert code == 0
    kinds = [r["kind"] for r in rows_of(out)]
    assert kinds == ["dual_uniform", "dual_subreg", "map_sub", "zeta_hat"]


def test_sweep_critical_exponent(capsys):
    code, out, _ = run(capsys, "sweep", "--example", "2.4", "--q", "1,2,2.5", "--format", "csv", *FAST)
    assert code == 0
    rows = rows_of(out)
    (crit,) = [r for r in rows if r["method"] == "critical_exponent"]
    assert float(crit["value"]) == 2.0 and crit["verdict"] == "found"


def test_sweep_sub_positive_on_example_2_1(capsys):
    code, out, _ = run(capsys, "sweep", "--example", "2.1", "--kinds", "sub", "--q", "0.5,1",
                       "--format", "csv", *FAST)
    assert code == 0
    verdicts = [r["verdict"] for r in rows_of(out) if r["method"] == "sweep"]
    assert verdicts and all(v in ("positive", "divergent") for v in verdicts)


def test_reproduce_passes(capsys):
    code, out, _ = run(capsys, "reproduce", "--example", "orth", "--format", "csv")
    assert code == 0
    rows = rows_of(out)
    assert rows and all(r["passed"] == "true" for r in rows)


def test_golden_failure_exits_one(capsys, monkeypatch):
    monkeypatch.setattr(cli, "_goldens", lambda name: [("semi", 1.0, 5.0, "rel", 0.01)])
    code, out, _ = run(capsys, "reproduce", "--example", "orth", "--format", "csv", *FAST)
    assert code == 1
    assert rows_of(out)[0]["passed"] == "false"


def test_verify_interior_point_passes_vacuously(capsys, tmp_path):
    spec = dict(QUADRANT, point=[-1, -1])
    code, out, _ = run(capsys, "verify", "--spec", write_spec(tmp_path, spec), "--q", "1", *FAST)
    assert code == 0
    doc = json.loads(out)
    values = [r for r in doc["rows"] if r["method"] == "sampled"]
    assert values and all(r["value"] == "inf" for r in values)
    assert all(r["passed"] is not False for r in doc["rows"])


def test_out_file(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, text, _ = run(capsys, "estimate", "--example", "orth", "--q", "1", "--kinds", "semi",
                        "--out", str(out), *FAST)
    assert code == 0 and text == ""
    assert json.loads(out.read_text())["config"]["example"] == "orth"


@pytest.mark.parametrize("argv", [
    ["reproduce", "--example", "9.9"],
    ["estimate"],
    ["estimate", "--example", "2.1", "--kinds", "bogus"],
    ["estimate", "--example", "2.1", "--q", "-1"],
    ["estimate", "--example", "2.1", "--shrink", "2"],
    ["frobnicate"],
    ["reproduce", "--spec", "nowhere.json"],
])
def test_usage_errors_exit_two(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert err


def test_malformed_json_exits_two(capsys, tmp_path):
    path = write_spec(tmp_path, '{"space": {"dim": 2},\n "sets": [}')
    code, _, err = run(capsys, "estimate", "--spec", path)
    assert code == 2 and "line 2" in err


def test_bad_field_exits_two(capsys, tmp_path):
    bad = dict(QUADRANT, sets=[{"kind": "halfspace", "normal": [0, 1, 2]}, {"kind": "whole_space"}])
    code, _, err = run(capsys, "estimate", "--spec", write_spec(tmp_path, bad))
    assert code == 2 and "sets[0]" in err


def test_base_point_outside_exits_three(capsys, tmp_path):
    spec = dict(QUADRANT, point=[1, 1])
    code, _, err = run(capsys, "estimate", "--spec", write_spec(tmp_path, spec))
    assert code == 3
    assert "base point violates" in err
