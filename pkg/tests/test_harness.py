import csv
import io
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from qheis import cli
from qheis.harness import (CHECKS, SUITES, CheckRecord, ConfigError, Report, RunConfig, emit_orbits, emit_report,
                           load_report, orbit_csv, run_suite, verify_orbit_csv)
from qheis.kernel import eta


@pytest.mark.parametrize("kwargs, field", [
    ({"suites": ()}, "suites"),
    ({"suites": ("nope",)}, "suites"),
    ({"grid_n": 100}, "grid_n"),
    ({"grid_n": 8}, "grid_n"),
    ({"grid_l": -1.0}, "grid_l"),
    ({"tol_grid": 0.0}, "tol"),
    ({"tol_analytic": -1.0}, "tol"),
    ({"n": 3}, "n"),
    ({"n": 2, "suites": ("braiding",)}, "n"),
    ({"seed": -1}, "seed"),
    ({"lam": float("nan")}, "lambda"),
])
def test_config_rejected_with_field(kwargs, field):
    with pytest.raises(ConfigError) as exc:
        RunConfig(**kwargs)
    assert exc.value.field == field
    assert str(exc.value).startswith(field)


def test_config_selection_and_echo():
    cfg = RunConfig(suites=("braiding", "groups"))
    assert cfg.selected() == ("groups", "braiding")
    assert RunConfig().selected() == SUITES
    d = RunConfig(seed=7).as_dict()
    assert list(d) == ["lambda", "n", "grid_n", "grid_l", "tol_grid", "tol_analytic", "seed", "suites"]
    assert RunConfig(n=2, suites=("groups", "dressing", "algebra")).n == 2


def test_report_schema_and_round_trip(tmp_path):
    recs = (CheckRecord("a [x]", "x", 1e-10, 1e-9), CheckRecord("b [y]", "y", 2.0, 1.0))
    rep = Report(RunConfig().as_dict(), recs, None)
    assert rep.summary == {"passed": 1, "failed": 1}
    assert not rep.ok
    text = emit_report(rep, tmp_path / "r.json")
    d = json.loads(text)
    assert list(d) == ["config", "checks", "summary", "wall_ms"]
    assert list(d["checks"][0]) == ["name", "anchor", "residual", "tol", "pass"]
    assert d["wall_ms"] is None
    assert load_report(tmp_path / "r.json") == rep
    assert not [p for p in os.listdir(tmp_path) if p.startswith(".qheis-")]


def test_empty_report():
    rep = Report({}, ())
    assert rep.summary == {"passed": 0, "failed": 0} and rep.ok


def test_report_parser_rejects_inconsistent_summary():
    rep = Report({}, (CheckRecord("a", "a", 1.0, 0.5),))
    d = json.loads(rep.to_json())
    d["summary"] = {"passed": 1, "failed": 0}
    with pytest.raises(ValueError):
        Report.from_json(json.dumps(d))


def test_pass_is_residual_at_most_tol():
    assert CheckRecord("a", "a", 1.0, 1.0).passed
    assert not CheckRecord("a", "a", float("inf"), 1.0).passed


def test_unwritable_path(tmp_path):
    with pytest.raises(OSError):
        emit_report(Report({}, ()), tmp_path / "missing" / "r.json")


def test_check_names_embed_anchors():
    keys = [c.key for c in CHECKS]
    assert len(keys) == len(set(keys))
    for c in CHECKS:
        assert c.name == f"{c.key} [{c.anchor}]"
        assert c.suite in SUITES and c.kind in ("grid", "analytic", "none")


def test_runs_are_byte_identical():
    cfg = RunConfig(suites=("groups",), seed=42)
    a, b = run_suite(cfg).to_json(), run_suite(cfg).to_json()
    assert a == b
    assert run_suite(RunConfig(suites=("groups",), seed=43)).to_json() != a


def test_check_randomness_independent_of_selection():
    alone = run_suite(RunConfig(suites=("algebra",)))
    mixed = run_suite(RunConfig(suites=("groups", "algebra")))
    sub = [c for c in mixed.checks if c.name.startswith("cocycle")]
    assert tuple(sub) == alone.checks


def test_tolerance_scaling():
    rep = run_suite(RunConfig(suites=("dressing",), tol_analytic=1e-30))
    scaled = {c.name.split(" ")[0]: c for c in rep.checks}
    assert scaled["dressing.H_on_G.right_action"].tol == pytest.approx(1e-30)
    # kind "none" checks keep their criterion tolerance
    assert scaled["dressing.H_on_G.lambda0"].tol == 1e-12
    assert not rep.ok


def test_timing_flag():
    assert run_suite(RunConfig(suites=("algebra",), timing=True)).wall_ms > 0
    assert run_suite(RunConfig(suites=("algebra",))).wall_ms is None


def test_crashing_check_fails(monkeypatch):
    from qheis import harness
    bad = harness.Check("algebra", "boom", "raises", 1.0, "none", lambda ctx: 1 / 0)
    monkeypatch.setattr(harness, "CHECKS", harness.CHECKS + [bad])
    rep = harness.run_suite(RunConfig(suites=("algebra",)))
    rec = [c for c in rep.checks if c.name.startswith("boom")][0]
    assert rec.residual == float("inf") and not rec.passed


# ----------------------------------------------------------------------------
# orbit CSV
# ----------------------------------------------------------------------------

def test_orbit_csv_header_only():
    text = orbit_csv("G", 0)
    assert text == "family,param_0,param_1,coord_0,coord_1,coord_2\n"


@pytest.mark.parametrize("space", ["G", "Gt", "H", "Ht"])
@pytest.mark.parametrize("n", [1, 2])
def test_orbit_rows_self_classify(space, n):
    text = orbit_csv(space, 40, 1.0, 42, n)
    assert verify_orbit_csv(text, space, 1.0, n) < 1e-8
    assert orbit_csv(space, 40, 1.0, 42, n) == text


def test_G_rows_with_r_carry_O_r():
    rows = list(csv.DictReader(io.StringIO(orbit_csv("G", 60, 1.0))))
    assert rows
    for row in rows:
        r = float(row["coord_2"])
        assert (row["family"] == "O_r") == (r != 0.0)


def test_Gt_rows_satisfy_invariant():
    lam = 1.0
    rows = list(csv.DictReader(io.StringIO(orbit_csv("Gt", 80, lam))))
    n_rs = 0
    for row in rows:
        if row["family"] != "O_rs":
            continue
        n_rs += 1
        p, q, r, s = (float(row[f"coord_{i}"]) for i in range(4))
        assert abs(s + p * q / eta(lam, r) - float(row["param_1"])) < 1e-8 * (1 + abs(float(row["param_1"])))
    assert n_rs > 0


def test_tampered_orbit_row_detected():
    text = orbit_csv("Gt", 20)
    lines = text.splitlines()
    for i, line in enumerate(lines[1:], 1):
        if line.startswith("O_rs"):
            parts = line.split(",")
            parts[2] = repr(float(parts[2]) + 0.5)
            lines[i] = ",".join(parts)
            break
    assert verify_orbit_csv("\n".join(lines) + "\n", "Gt") > 1e-3


def test_orbit_input_validation(tmp_path):
    with pytest.raises(ValueError):
        orbit_csv("X", 3)
    with pytest.raises(ValueError):
        orbit_csv("G", -1)
    p = tmp_path / "o.csv"
    emit_orbits("H", 5, out=p)
    assert p.read_text() == orbit_csv("H", 5)


# ----------------------------------------------------------------------------
# command line
# ----------------------------------------------------------------------------

def test_cli_verify_writes_report(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert cli.main(["verify", "--suite", "groups", "--suite", "algebra", "--out", str(out)]) == 0
    rep = load_report(out)
    assert rep.ok and rep.config["suites"] == ["groups", "algebra"]
    assert "passed" in capsys.readouterr().err


def test_cli_verify_stdout_is_deterministic(capsys):
    cli.main(["verify", "--suite", "groups", "--seed", "9"])
    a = capsys.readouterr().out
    cli.main(["verify", "--suite", "groups", "--seed", "9"])
    assert capsys.readouterr().out == a
    assert json.loads(a)["config"]["seed"] == 9


def test_cli_failure_exit_status(capsys):
    assert cli.main(["verify", "--suite", "dressing", "--tol-analytic", "1e-30"]) == 1
    assert "FAIL" in capsys.readouterr().err


def test_cli_invalid_config(capsys):
    assert cli.main(["verify", "--grid-n", "100"]) == 2
    assert "grid_n" in capsys.readouterr().err
    assert cli.main(["orbits", "--space", "G", "--count", "-2"]) == 2
    with pytest.raises(SystemExit):
        cli.main(["verify", "--suite", "nope"])


def test_cli_unwritable_output(tmp_path):
    assert cli.main(["orbits", "--space", "G", "--count", "2", "--out", str(tmp_path / "no" / "x.csv")]) == 3


def test_cli_orbits(tmp_path, capsys):
    assert cli.main(["orbits", "--space", "Ht", "--count", "4", "--seed", "3"]) == 0
    assert capsys.readouterr().out == orbit_csv("Ht", 4, 1.0, 3)
    out = tmp_path / "g.csv"
    assert cli.main(["orbits", "--space", "Gt", "--count", "4", "--lambda", "0.5", "--out", str(out)]) == 0
    assert out.read_text() == orbit_csv("Gt", 4, 0.5, 42)


def test_cli_braid(capsys):
    assert cli.main(["braid", "--r", "0.5", "--r-prime", "0.5", "--lambda", "1"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["composition_vs_closed_form"] < 1e-6
    assert abs(d["distance_to_identity"] - 0.98431690856531177610) < 1e-12


def test_console_script_exit_status(tmp_path):
    ok = subprocess.run([sys.executable, "-m", "qheis.cli", "verify", "--suite", "algebra"],
                        capture_output=True, text=True)
    assert ok.returncode == 0
    bad = subprocess.run([sys.executable, "-m", "qheis.cli", "verify", "--suite", "dressing",
                          "--tol-analytic", "1e-30"], capture_output=True, text=True)
    assert bad.returncode != 0
