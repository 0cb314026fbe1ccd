"""Command-line harness tests: exit codes, schemas, determinism.

Runs the CLI in-process through ``main(argv)`` inside a temporary
directory.  File-format assertions parse the written CSV/JSONL back and
check the versioned schema header; determinism assertions compare bytes
across reruns and thread counts.
"""

import csv
import json
import math
import os

import pytest

from poisson_nav.cli import main
from poisson_nav.ratefn import rho_closed_form
from poisson_nav.nav import ModelParams
from poisson_nav.report import format_cell, header_line, write_csv, write_jsonl
from poisson_nav.validate import CheckResult, build_report, run_checks

QUARTER_TEXT = "0.785398163"  # pi/4 to the digits used in the docs

SMALL_SEGMENTS = "20000"


def read_csv_table(path):
    """Parse a schema-stamped CSV into (schema, fieldnames, row dicts)."""
    with open(path) as fh:
        first = fh.readline().rstrip("\n")
        reader = csv.reader(fh)
        fields = next(reader)
        rows = [dict(zip(fields, row)) for row in reader]
    assert first.startswith("# poisson-nav v1 ")
    return first.split(" ", 3)[3], fields, rows


def read_jsonl_records(path):
    """Parse a schema-stamped JSONL into (schema, record dicts)."""
    with open(path) as fh:
        first = fh.readline().rstrip("\n")
        records = [json.loads(line) for line in fh if not line.startswith("#")]
    assert first.startswith("# poisson-nav v1 ")
    return first.split(" ", 3)[3], records


def run_cli(tmp_path, *argv):
    cwd = os.getcwd()
    os.chdir(tmp_path)
    try:
        return main(list(argv))
    finally:
        os.chdir(cwd)


# ---------------------------------------------------------------------------
# serialization helpers


def test_header_line_is_versioned():
    assert header_line("trajectory") == "# poisson-nav v1 trajectory"


def test_format_cell_round_trips_floats():
    for value in (0.1, -1.0e-17, math.pi, 1.0e300, float("inf")):
        assert float(format_cell(value)) == value
    assert format_cell(None) == ""
    assert format_cell(True) == "true"
    assert format_cell(False) == "false"
    assert format_cell(7) == "7"


def test_write_csv_and_jsonl_round_trip(tmp_path):
    rows = [(1, 0.5, "ok"), (2, float("nan"), "x,y")]
    path = write_csv(tmp_path / "t.csv", "demo", ("i", "v", "s"), rows)
    schema, fields, parsed = read_csv_table(path)
    assert schema == "demo"
    assert fields == ["i", "v", "s"]
    assert parsed[1]["s"] == "x,y"
    jpath = write_jsonl(tmp_path / "t.jsonl", "demo", [{"a": 1}, {"a": 2}])
    schema, records = read_jsonl_records(jpath)
    assert schema == "demo"
    assert [r["a"] for r in records] == [1, 2]


# ---------------------------------------------------------------------------
# simulate


def test_simulate_quarter_angle_renews_every_step(tmp_path):
    code = run_cli(
        tmp_path, "simulate", "--lambda", "1", "--theta", QUARTER_TEXT,
        "--steps", "100", "--paths", "10", "--seed", "7", "--out", "sim",
    )
    assert code == 0
    schema, records = read_jsonl_records(tmp_path / "sim.jsonl")
    assert schema == "trajectory"
    assert len(records) == 10
    for k, rec in enumerate(records):
        assert rec["path_id"] == k
        assert len(rec["steps"]) == 100
        assert rec["renewal_indices"] == list(range(1, 101))
    schema, fields, rows = read_csv_table(tmp_path / "sim-summary.csv")
    assert schema == "path-summary"
    assert fields == ["path_id", "n_steps", "final_x", "final_y", "n_renewals"]
    assert len(rows) == 10
    assert all(row["n_renewals"] == "100" for row in rows)
    for rec, row in zip(records, rows):
        total = sum(d[0] for d in rec["steps"])
        assert math.isclose(float(row["final_x"]), total, rel_tol=1e-12)
    assert (tmp_path / "sim.png").stat().st_size > 0


def test_simulate_rerun_is_byte_identical(tmp_path):
    argv = (
        "simulate", "--lambda", "1", "--theta", QUARTER_TEXT,
        "--steps", "40", "--paths", "6", "--seed", "11",
    )
    assert run_cli(tmp_path, *argv, "--out", "a") == 0
    assert run_cli(tmp_path, *argv, "--out", "b") == 0
    for ext in (".jsonl", "-summary.csv", ".png"):
        a = (tmp_path / f"a{ext}").read_bytes()
        b = (tmp_path / f"b{ext}").read_bytes()
        assert a == b, f"rerun differs for {ext}"


def test_simulate_thread_count_does_not_change_output(tmp_path):
    argv = (
        "simulate", "--lambda", "1", "--theta", "1.2", "--steps", "50",
        "--paths", "16", "--seed", "5",
    )
    assert run_cli(tmp_path, *argv, "--threads", "1", "--out", "t1") == 0
    assert run_cli(tmp_path, *argv, "--threads", "8", "--out", "t8") == 0
    assert (tmp_path / "t1.jsonl").read_bytes() == (
        tmp_path / "t8.jsonl"
    ).read_bytes()
    assert (tmp_path / "t1-summary.csv").read_bytes() == (
        tmp_path / "t8-summary.csv"
    ).read_bytes()
    assert (tmp_path / "t1.png").read_bytes() == (
        tmp_path / "t8.png"
    ).read_bytes()


def test_nav_threads_env_overrides_flag(tmp_path, monkeypatch):
    argv = (
        "simulate", "--theta", "1.2", "--steps", "30", "--paths", "8",
        "--seed", "3",
    )
    assert run_cli(tmp_path, *argv, "--threads", "1", "--out", "base") == 0
    monkeypatch.setenv("NAV_THREADS", "4")
    assert run_cli(tmp_path, *argv, "--threads", "1", "--out", "env") == 0
    assert (tmp_path / "base.jsonl").read_bytes() == (
        tmp_path / "env.jsonl"
    ).read_bytes()
    monkeypatch.setenv("NAV_THREADS", "zero")
    assert run_cli(tmp_path, *argv, "--out", "bad") == 2


def test_simulate_time_horizon_crosses_target(tmp_path):
    code = run_cli(
        tmp_path, "simulate", "--theta", "1.2", "--time", "30",
        "--paths", "5", "--seed", "2", "--out", "tt",
    )
    assert code == 0
    _, _, rows = read_csv_table(tmp_path / "tt-summary.csv")
    for row in rows:
        assert float(row["final_x"]) >= 30.0
    counts = {row["n_steps"] for row in rows}
    assert len(counts) > 1  # random horizons differ across paths


def test_simulate_sampler_choice_changes_draws(tmp_path):
    argv = ("simulate", "--theta", "1.0", "--steps", "20", "--paths", "2",
            "--seed", "4")
    assert run_cli(tmp_path, *argv, "--sampler", "points", "--out", "p") == 0
    assert run_cli(tmp_path, *argv, "--sampler", "inversion", "--out", "i") == 0
    p = read_jsonl_records(tmp_path / "p.jsonl")[1]
    i = read_jsonl_records(tmp_path / "i.jsonl")[1]
    assert p[0]["steps"] != i[0]["steps"]


def test_simulate_rejects_both_horizons(tmp_path):
    assert run_cli(
        tmp_path, "simulate", "--steps", "5", "--time", "3.0", "--out", "x"
    ) == 2


# ---------------------------------------------------------------------------
# estimators


def test_rho_output_matches_closed_form(tmp_path):
    code = run_cli(
        tmp_path, "rho", "--lambda", "1", "--theta-frac", "1/4",
        "--segments", SMALL_SEGMENTS, "--seed", "1", "--out", "rho",
    )
    assert code == 0
    schema, fields, rows = read_csv_table(tmp_path / "rho.csv")
    assert schema == "rho-estimate"
    assert len(rows) == 1
    row = rows[0]
    closed = rho_closed_form(ModelParams(1.0, math.pi / 4.0))
    assert float(row["closed_form"]) == pytest.approx(closed, rel=1e-15)
    gap = abs(float(row["value"]) - closed)
    assert gap <= 3.0 * float(row["stderr"])
    assert float(row["ci_low"]) < float(row["value"]) < float(row["ci_high"])
    assert (tmp_path / "rho.png").stat().st_size > 0


def test_theta_frac_matches_radian_spelling(tmp_path):
    argv = ("rho", "--lambda", "1", "--segments", "5000", "--seed", "6")
    assert run_cli(tmp_path, *argv, "--theta-frac", "1/4", "--out", "f") == 0
    assert run_cli(
        tmp_path, *argv, "--theta", repr(math.pi / 4.0), "--out", "r"
    ) == 0
    f = (tmp_path / "f.csv").read_bytes()
    r = (tmp_path / "r.csv").read_bytes()
    assert f == r


def test_kappa_jsonl_format(tmp_path):
    code = run_cli(
        tmp_path, "kappa", "--theta", "0.6", "--segments", "5000",
        "--seed", "2", "--format", "jsonl", "--out", "kap",
    )
    assert code == 0
    schema, records = read_jsonl_records(tmp_path / "kap.jsonl")
    assert schema == "kappa-estimate"
    rec = records[0]
    assert rec["n_segments"] == 5000
    assert rec["ci_low"] < rec["value"] < rec["ci_high"]
    # single steps below pi/4: renewal density is one over step progress
    assert rec["closed_form"] == pytest.approx(
        1.0 / (math.sqrt(math.pi / (4.0 * 0.6)) * math.sin(0.6) / 0.6)
    )


def test_tau_tail_respects_geometric_bound(tmp_path):
    theta = 3.0 * math.pi / 8.0
    code = run_cli(
        tmp_path, "tau-tail", "--theta", repr(theta), "--paths", "20000",
        "--seed", "3", "--out", "tail",
    )
    assert code == 0
    schema, _, rows = read_csv_table(tmp_path / "tail.csv")
    assert schema == "tau-tail"
    surv = [float(row["survival"]) for row in rows]
    assert surv == sorted(surv, reverse=True)
    base = (4.0 * theta - math.pi) / (4.0 * theta)
    for row in rows[:4]:
        level = int(row["level"])
        slack = float(row["survival"]) - float(row["ci_low"])
        assert float(row["survival"]) >= base**level - 3.0 * slack
    assert (tmp_path / "tail.png").stat().st_size > 0


# ---------------------------------------------------------------------------
# rate and cgf tables


def test_rate_ldp_zero_slope_is_zero(tmp_path):
    code = run_cli(
        tmp_path, "rate", "ldp", "--lambda", "1", "--theta", "0.6",
        "--x", "0.0", "--out", "ldp",
    )
    assert code == 0
    schema, fields, rows = read_csv_table(tmp_path / "ldp.csv")
    assert schema == "rate-ldp"
    assert fields == [
        "x", "value", "witness_beta", "witness_gamma1", "witness_gamma2",
        "converged",
    ]
    row = rows[0]
    assert abs(float(row["value"])) <= 1.0e-9
    assert row["converged"] == "true"
    assert float(row["witness_beta"]) > 0.0


def test_rate_ldp_infinite_outside_cone(tmp_path):
    code = run_cli(
        tmp_path, "rate", "ldp", "--theta", "0.6", "--x", "0.2,2.0",
        "--format", "jsonl", "--out", "ldpw",
    )
    assert code == 0
    _, records = read_jsonl_records(tmp_path / "ldpw.jsonl")
    finite, infinite = records
    assert 0.0 < finite["value"] < float("inf")
    assert infinite["value"] == "inf"
    assert infinite["witness_beta"] is None
    assert infinite["converged"] is True


def test_rate_ldp_rejects_wide_cone(tmp_path):
    assert run_cli(
        tmp_path, "rate", "ldp", "--theta", "1.2", "--x", "0.1", "--out", "w"
    ) == 2


def test_rate_mdp_is_quadratic(tmp_path):
    code = run_cli(
        tmp_path, "rate", "mdp", "--theta", "0.6", "--x", "0,0.5",
        "--x", "1.0", "--out", "mdp",
    )
    assert code == 0
    schema, _, rows = read_csv_table(tmp_path / "mdp.csv")
    assert schema == "rate-mdp"
    rho = rho_closed_form(ModelParams(1.0, 0.6))
    assert [float(r["x"]) for r in rows] == [0.0, 0.5, 1.0]
    for row in rows:
        x = float(row["x"])
        assert float(row["value"]) == pytest.approx(rho * x * x, abs=1e-15)


def test_rate_mdp_requires_x(tmp_path):
    assert run_cli(tmp_path, "rate", "mdp", "--theta", "0.6", "--out", "m") == 2


def test_rate_dependent_reproduces_synthetic_optimum(tmp_path):
    code = run_cli(tmp_path, "rate", "dependent", "--a", "1", "--out", "dep")
    assert code == 0
    schema, _, rows = read_csv_table(tmp_path / "dep.csv")
    assert schema == "rate-dependent"
    row = rows[0]
    assert float(row["value"]) == pytest.approx(
        2.0 * math.sqrt(2.0) - 2.0, abs=1.0e-3
    )
    assert row["converged"] == "true"
    assert float(row["witness_b"]) == pytest.approx(1.0, abs=0.01)


def test_cgf_exact_and_monte_carlo_columns(tmp_path):
    code = run_cli(
        tmp_path, "cgf", "--theta-frac", "1/4", "--gamma", "0,0",
        "--gamma", "0.1,0.05", "--segments", "3000", "--seed", "8",
        "--out", "cgf",
    )
    assert code == 0
    schema, fields, rows = read_csv_table(tmp_path / "cgf.csv")
    assert schema == "cgf"
    assert fields == [
        "gamma1", "gamma2", "value", "mc_value", "mc_stderr", "mc_unstable",
    ]
    assert float(rows[0]["value"]) == 0.0
    assert float(rows[0]["mc_value"]) == 0.0
    row = rows[1]
    gap = abs(float(row["mc_value"]) - float(row["value"]))
    assert gap <= 4.0 * float(row["mc_stderr"])
    assert row["mc_unstable"] == "false"


def test_cgf_without_segments_is_exact_only(tmp_path):
    code = run_cli(
        tmp_path, "cgf", "--theta", "0.6", "--gamma", "0.2,0.0", "--out", "ce"
    )
    assert code == 0
    _, fields, rows = read_csv_table(tmp_path / "ce.csv")
    assert fields == ["gamma1", "gamma2", "value"]
    assert float(rows[0]["value"]) > 0.0


def test_cgf_requires_gamma(tmp_path):
    assert run_cli(tmp_path, "cgf", "--theta", "0.6", "--out", "c") == 2


# ---------------------------------------------------------------------------
# config file handling


def test_config_file_fills_unset_flags_and_flags_win(tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text(
        'lambda = 2.5\ntheta-frac = "1/6"\nsegments = 5000\nseed = 9\n'
    )
    code = run_cli(
        tmp_path, "rho", "--config", str(cfg), "--seed", "1", "--out", "rc"
    )
    assert code == 0
    _, _, rows = read_csv_table(tmp_path / "rc.csv")
    row = rows[0]
    assert row["seed"] == "1"  # flag beats file
    assert float(row["lambda"]) == 2.5
    assert float(row["theta"]) == pytest.approx(math.pi / 6.0)
    assert row["n_segments"] == "5000"


def test_config_file_json_with_list_value(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"lambda": 4.0, "x": [0.0, 0.5]}))
    code = run_cli(
        tmp_path, "rate", "mdp", "--config", str(cfg), "--theta", "0.5",
        "--out", "rj",
    )
    assert code == 0
    _, _, rows = read_csv_table(tmp_path / "rj.csv")
    assert [float(r["x"]) for r in rows] == [0.0, 0.5]
    rho = rho_closed_form(ModelParams(4.0, 0.5))
    assert float(rows[1]["value"]) == pytest.approx(rho * 0.25)


def test_config_file_unknown_key_rejected(tmp_path):
    cfg = tmp_path / "bad.toml"
    cfg.write_text("paths = 3\nbogus = 1\n")
    assert run_cli(
        tmp_path, "simulate", "--config", str(cfg), "--out", "b"
    ) == 2


def test_config_file_missing_rejected(tmp_path):
    assert run_cli(
        tmp_path, "simulate", "--config", str(tmp_path / "none.toml"),
        "--out", "m",
    ) == 2


# ---------------------------------------------------------------------------
# config validation


def test_right_angle_cone_rejected_with_explanation(tmp_path, capsys):
    code = run_cli(
        tmp_path, "validate", "--theta", repr(math.pi / 2.0), "--out", "v"
    )
    assert code == 2
    err = capsys.readouterr().err
    assert "pi/2" in err
    assert "strictly below" in err


def test_bad_parameter_ranges_rejected(tmp_path):
    assert run_cli(tmp_path, "rho", "--lambda", "-1", "--out", "x") == 2
    assert run_cli(tmp_path, "rho", "--theta", "3.5", "--out", "x") == 2
    assert run_cli(tmp_path, "simulate", "--steps", "0", "--out", "x") == 2
    assert run_cli(tmp_path, "simulate", "--threads", "0", "--out", "x") == 2
    assert run_cli(
        tmp_path, "simulate", "--theta-frac", "1/0", "--out", "x"
    ) == 2
    assert run_cli(
        tmp_path, "simulate", "--theta", "0.5", "--theta-frac", "1/4",
        "--out", "x",
    ) == 2


def test_unknown_subcommand_exits_two(tmp_path):
    with pytest.raises(SystemExit) as exc:
        run_cli(tmp_path, "bogus")
    assert exc.value.code == 2


# ---------------------------------------------------------------------------
# validate subcommand and report plumbing


def test_validate_single_check_writes_table(tmp_path, capsys):
    code = run_cli(
        tmp_path, "validate", "--check", "rate-numerics", "--out", "val"
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "PASS rate-numerics" in out
    assert "overall PASS (1/1)" in out
    schema, fields, rows = read_csv_table(tmp_path / "val.csv")
    assert schema == "validation"
    assert fields == [
        "check", "status", "statistic", "threshold", "seed", "detail",
    ]
    assert len(rows) == 1
    assert rows[0]["check"] == "rate-numerics"
    assert rows[0]["status"] == "pass"


def test_validate_unknown_check_exits_two(tmp_path):
    assert run_cli(tmp_path, "validate", "--check", "nope", "--out", "v") == 2


def test_run_checks_rejects_unknown_names():
    with pytest.raises(ValueError):
        run_checks(["not-a-check"])


def test_report_overall_is_conjunction_of_statuses():
    good = CheckResult("a", True, 1.0, 0.5, 1)
    bad = CheckResult("b", False, 0.1, 0.5, 2)
    assert build_report([good, good]).overall is True
    report = build_report([good, bad])
    assert report.overall is False
    assert [c.name for c in report.checks] == ["a", "b"]
