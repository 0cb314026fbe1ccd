"""Command-line interface: configuration, execution, serialization.

Subcommands: ``simulate``, ``rho``, ``kappa``, ``tau-tail``,
``rate {mdp|ldp|dependent}``, ``cgf``, ``validate``.  Every run is a
pure function of the merged configuration: flags win over the optional
``--config`` file (TOML or JSON, same keys as the long flags), the
``NAV_THREADS`` environment variable overrides ``--threads``, and all
outputs are reproduced byte for byte on rerun.  Exit codes: 0 success,
1 runtime or validation failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

try:
    import tomllib as _toml
except ModuleNotFoundError:  # pragma: no cover - Python < 3.11
    import tomli as _toml

from . import report
from .nav import ModelParams, PathSample, simulate_path
from .ratefn import (
    _step_mean_x,
    cgf_grid,
    dependent_ldp_rate,
    ldp_rate,
    mdp_rate,
    rho_closed_form,
    segment_cgf_mc,
)
from .renewal import estimate_kappa, estimate_rho, segments, tau_tail
from .validate import CHECKS, run_checks

HALF_PI = math.pi / 2.0
MAX_SEED = 2**64 - 1

# Defaults applied after the flag/config merge; per-command entries
# override the shared ones.
BASE_DEFAULTS = {
    "intensity": 1.0,
    "theta": math.pi / 4.0,
    "seed": 0,
    "paths": 10,
    "segments": 100_000,
    "sampler": "points",
    "format": "csv",
    "threads": 1,
    "a": 1.0,
    "eps": 1.0,
}
COMMAND_DEFAULTS = {
    "simulate": {"paths": 10},
    "tau-tail": {"paths": 10_000},
    # cgf is exact by default; a positive --segments adds the MC column
    "cgf": {"segments": 0},
}

_CONFIG_KEY_ALIASES = {"lambda": "intensity", "t": "time"}


class ConfigError(ValueError):
    """Invalid configuration; maps to exit code 2."""


@dataclass(frozen=True)
class RunConfig:
    """Fully merged and validated parameters of one command invocation."""

    command: str
    intensity: float
    theta: float
    seed: int
    paths: int
    segments: int
    steps: int | None
    time: float | None
    sampler: str
    format: str
    out: str
    threads: int
    mode: str | None = None
    xs: tuple[float, ...] = ()
    gammas: tuple[tuple[float, float], ...] = ()
    a: float = 1.0
    eps: float = 1.0
    checks: tuple[str, ...] = ()

    @property
    def params(self) -> ModelParams:
        return ModelParams(self.intensity, self.theta)


# ---------------------------------------------------------------------------
# argument parsing and config-file merge


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML or JSON config file; flags win")
    common.add_argument(
        "--lambda", dest="intensity", type=float, help="point process intensity"
    )
    common.add_argument("--theta", type=float, help="cone half-angle in radians")
    common.add_argument(
        "--theta-frac",
        help="cone half-angle as a fraction p/q of pi, e.g. 1/4",
    )
    common.add_argument("--seed", type=int, help="base seed (64-bit unsigned)")
    common.add_argument(
        "--sampler", choices=("points", "inversion"), help="step sampler"
    )
    common.add_argument(
        "--format", choices=("csv", "jsonl"), help="table output format"
    )
    common.add_argument("--out", help="output file stem")
    common.add_argument("--threads", type=int, help="worker threads")

    parser = argparse.ArgumentParser(
        prog="poisson-nav",
        description=(
            "Simulation, renewal statistics, and deviation-rate numerics "
            "for directed cone navigations on a planar Poisson process."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "simulate", parents=[common], help="sample paths to JSONL plus summary CSV"
    )
    p.add_argument("--paths", type=int, help="number of independent paths")
    p.add_argument("--steps", type=int, help="steps per path")
    p.add_argument("--time", type=float, help="horizontal time horizon per path")

    p = sub.add_parser(
        "rho", parents=[common], help="estimate the curvature constant rho"
    )
    p.add_argument("--segments", type=int, help="renewal segments to collect")

    p = sub.add_parser(
        "kappa", parents=[common], help="estimate the renewal density kappa"
    )
    p.add_argument("--segments", type=int, help="renewal segments to collect")

    p = sub.add_parser(
        "tau-tail", parents=[common], help="renewal waiting-time tail curve"
    )
    p.add_argument("--paths", type=int, help="number of independent paths")

    p = sub.add_parser(
        "rate", parents=[common], help="deviation rate-function tables"
    )
    p.add_argument(
        "mode", choices=("mdp", "ldp", "dependent"), help="which rate to evaluate"
    )
    p.add_argument(
        "--x",
        action="append",
        help="slope value(s), comma separated and/or repeated",
    )
    p.add_argument("--segments", type=int, help="segments for the MC rho (mdp)")
    p.add_argument("--a", type=float, help="displacement level (dependent)")
    p.add_argument(
        "--eps", type=float, help="tail-cost scale of the synthetic fixture"
    )

    p = sub.add_parser(
        "cgf", parents=[common], help="step cumulant generating function table"
    )
    p.add_argument(
        "--gamma",
        action="append",
        help="evaluation point 'g1,g2'; repeatable",
    )
    p.add_argument(
        "--segments",
        type=int,
        help="also estimate the segment CGF from this many segments",
    )

    p = sub.add_parser(
        "validate", parents=[common], help="run the pinned-seed validation suite"
    )
    p.add_argument(
        "--check",
        action="append",
        help="run only the named check(s); repeatable",
    )
    return parser


def _load_config_file(path: str) -> dict:
    try:
        if path.endswith(".json"):
            with open(path) as fh:
                data = json.load(fh)
        else:
            with open(path, "rb") as fh:
                data = _toml.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except (json.JSONDecodeError, _toml.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot parse config file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a table of keys")
    return data


def _merge_config_file(ns: argparse.Namespace, data: dict) -> None:
    """Fill unset namespace entries from the config file (flags win)."""
    for raw_key, value in data.items():
        key = raw_key.replace("-", "_")
        key = _CONFIG_KEY_ALIASES.get(key, key)
        if not hasattr(ns, key):
            raise ConfigError(f"unknown config key: {raw_key}")
        if getattr(ns, key) is None:
            setattr(ns, key, value)


def _parse_theta_frac(text: str) -> float:
    m = re.fullmatch(r"\s*(\d+)\s*/\s*(\d+)\s*", str(text))
    if not m or int(m.group(2)) == 0:
        raise ConfigError(f"--theta-frac must look like p/q, got {text!r}")
    return math.pi * int(m.group(1)) / int(m.group(2))


def _float_list(value, flag: str) -> tuple[float, ...]:
    """Flatten repeated/comma-separated flag values into floats."""
    if value is None:
        return ()
    items = value if isinstance(value, (list, tuple)) else [value]
    out = []
    for item in items:
        parts = str(item).split(",") if isinstance(item, str) else [item]
        for part in parts:
            if isinstance(part, str) and not part.strip():
                continue
            try:
                out.append(float(part))
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad {flag} value: {part!r}") from exc
    return tuple(out)


def _gamma_list(value) -> tuple[tuple[float, float], ...]:
    if value is None:
        return ()
    items = value if isinstance(value, (list, tuple)) else [value]
    out = []
    for item in items:
        pair = item.split(",") if isinstance(item, str) else list(item)
        if len(pair) != 2:
            raise ConfigError(f"--gamma needs 'g1,g2', got {item!r}")
        try:
            out.append((float(pair[0]), float(pair[1])))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad --gamma value: {item!r}") from exc
    return tuple(out)


def _str_list(value) -> tuple[str, ...]:
    if value is None:
        return ()
    items = value if isinstance(value, (list, tuple)) else [value]
    return tuple(str(item) for item in items)


def _resolve_threads(flag_value) -> int:
    env = os.environ.get("NAV_THREADS")
    if env:
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigError(f"NAV_THREADS must be an integer, got {env!r}") from exc
    if flag_value is None:
        return BASE_DEFAULTS["threads"]
    return int(flag_value)


def build_config(ns: argparse.Namespace) -> RunConfig:
    """Merge flags, config file, and defaults into a validated RunConfig."""
    if getattr(ns, "config", None):
        _merge_config_file(ns, _load_config_file(ns.config))

    def pick(name, cast=None):
        value = getattr(ns, name, None)
        if value is None:
            value = COMMAND_DEFAULTS.get(ns.command, {}).get(name)
        if value is None:
            value = BASE_DEFAULTS.get(name)
        if value is None or cast is None:
            return value
        try:
            return cast(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {name}: {value!r}") from exc

    theta = pick("theta", float)
    frac = getattr(ns, "theta_frac", None)
    if frac is not None:
        if getattr(ns, "theta", None) is not None:
            raise ConfigError("give --theta or --theta-frac, not both")
        theta = _parse_theta_frac(frac)

    steps = pick("steps", int)
    time = pick("time", float)
    if ns.command == "simulate" and steps is None and time is None:
        steps = 100

    cfg = RunConfig(
        command=ns.command,
        intensity=pick("intensity", float),
        theta=theta,
        seed=pick("seed", int),
        paths=pick("paths", int),
        segments=pick("segments", int),
        steps=steps,
        time=time,
        sampler=pick("sampler", str),
        format=pick("format", str),
        out=pick("out", str) or f"poisson-nav-{ns.command}",
        threads=_resolve_threads(getattr(ns, "threads", None)),
        mode=getattr(ns, "mode", None),
        xs=_float_list(getattr(ns, "x", None), "--x"),
        gammas=_gamma_list(getattr(ns, "gamma", None)),
        a=pick("a", float),
        eps=pick("eps", float),
        checks=_str_list(getattr(ns, "check", None)),
    )
    _validate_config(cfg)
    return cfg


def _validate_config(cfg: RunConfig) -> None:
    if not (math.isfinite(cfg.intensity) and cfg.intensity > 0.0):
        raise ConfigError(f"lambda must be a positive real, got {cfg.intensity}")
    if cfg.theta == HALF_PI:
        raise ConfigError(
            "theta = pi/2 is outside the model: the navigation cone must "
            "leave a complementary cone of positive angle, so the half-"
            "angle has to be strictly below pi/2"
        )
    if not (0.0 < cfg.theta < HALF_PI):
        raise ConfigError(
            f"theta must lie strictly between 0 and pi/2, got {cfg.theta}"
        )
    if not (0 <= cfg.seed <= MAX_SEED):
        raise ConfigError("seed must fit in 64 unsigned bits")
    if cfg.threads < 1:
        raise ConfigError("threads must be at least 1")
    if cfg.paths < 1:
        raise ConfigError("paths must be at least 1")
    if cfg.command in ("rho", "kappa") and cfg.segments < 1:
        raise ConfigError("segments must be at least 1")
    if cfg.command == "cgf" and cfg.segments < 0:
        raise ConfigError("segments must not be negative")
    if cfg.command == "simulate":
        if cfg.steps is not None and cfg.time is not None:
            raise ConfigError("give --steps or --time, not both")
        if cfg.steps is not None and cfg.steps < 1:
            raise ConfigError("steps must be at least 1")
        if cfg.time is not None and not (
            math.isfinite(cfg.time) and cfg.time > 0.0
        ):
            raise ConfigError("time must be a positive real")
    if cfg.command == "rate":
        if cfg.mode in ("mdp", "ldp") and not cfg.xs:
            raise ConfigError(f"rate {cfg.mode} needs at least one --x value")
        if cfg.mode == "ldp" and cfg.theta > math.pi / 4.0 + 1.0e-12:
            raise ConfigError(
                "rate ldp requires theta <= pi/4, where the renewal "
                "segments are single steps and the rate composes from "
                "the step transform"
            )
        if cfg.mode == "dependent" and not (
            math.isfinite(cfg.eps) and cfg.eps > 0.0
        ):
            raise ConfigError("eps must be a positive real")
    if cfg.command == "cgf" and not cfg.gammas:
        raise ConfigError("cgf needs at least one --gamma point")
    if cfg.command == "validate":
        unknown = [name for name in cfg.checks if name not in CHECKS]
        if unknown:
            raise ConfigError(
                f"unknown check(s): {', '.join(unknown)}; "
                f"available: {', '.join(CHECKS)}"
            )


# ---------------------------------------------------------------------------
# shared output helpers


def _write_table(cfg: RunConfig, schema: str, fields, rows) -> str:
    path = f"{cfg.out}.{cfg.format}"
    if cfg.format == "csv":
        return report.write_csv(path, schema, fields, rows)
    records = [dict(zip(fields, row)) for row in rows]
    for record in records:
        for key, value in record.items():
            # JSON has no literal for non-finite floats
            if isinstance(value, float) and math.isinf(value):
                record[key] = "inf" if value > 0 else "-inf"
            elif isinstance(value, float) and math.isnan(value):
                record[key] = None
    return report.write_jsonl(path, schema, records)


def _announce(*paths: str) -> None:
    for path in paths:
        print(f"wrote {path}")


# ---------------------------------------------------------------------------
# subcommand implementations


def _simulate_one(cfg: RunConfig, index: int) -> PathSample:
    return simulate_path(
        cfg.params,
        seed=cfg.seed,
        sampler=cfg.sampler,
        steps=cfg.steps,
        time=cfg.time,
        path_index=index,
    )


def run_simulate(cfg: RunConfig) -> int:
    """Sample paths in parallel and write trajectories plus a summary.

    Work is stolen over path indices by a thread pool; every path is a
    pure function of (seed, path index), and writing happens on the main
    thread in index order, so the files do not depend on thread count.
    """
    indices = range(cfg.paths)
    if cfg.threads == 1:
        paths = [_simulate_one(cfg, k) for k in indices]
    else:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            paths = list(pool.map(lambda k: _simulate_one(cfg, k), indices))

    records = []
    summary_rows = []
    trajectories = []
    marks = []
    for k, path in enumerate(paths):
        dxy = [
            [rec.progress_cart.x, rec.progress_cart.y] for rec in path.steps
        ]
        records.append(
            {
                "path_id": k,
                "steps": dxy,
                "renewal_indices": list(path.renewal_indices),
            }
        )
        xs = [0.0]
        ys = [0.0]
        for dx, dy in dxy:
            xs.append(xs[-1] + dx)
            ys.append(ys[-1] + dy)
        summary_rows.append((k, len(path.steps), xs[-1], ys[-1],
                             len(path.renewal_indices)))
        if k < report.MAX_TRAJECTORIES:
            trajectories.append((xs, ys))
            marks.append(
                (
                    [xs[n] for n in path.renewal_indices],
                    [ys[n] for n in path.renewal_indices],
                )
            )

    traj_path = report.write_jsonl(f"{cfg.out}.jsonl", "trajectory", records)
    summary_path = report.write_csv(
        f"{cfg.out}-summary.csv",
        "path-summary",
        ("path_id", "n_steps", "final_x", "final_y", "n_renewals"),
        summary_rows,
    )
    fig_path = report.save_trajectory_figure(
        f"{cfg.out}.png", trajectories, marks
    )
    _announce(traj_path, summary_path, fig_path)
    horizon = (
        f"{cfg.steps} steps" if cfg.time is None else f"time {cfg.time:g}"
    )
    print(f"simulate: {cfg.paths} path(s) of {horizon}, seed {cfg.seed}")
    return 0


def _estimate_command(cfg: RunConfig, estimator, label: str, closed) -> int:
    est = estimator(cfg.params, cfg.segments, cfg.seed, sampler=cfg.sampler)
    fields = (
        "lambda", "theta", "n_segments", "seed",
        "value", "stderr", "ci_low", "ci_high", "closed_form",
    )
    row = (
        cfg.intensity, cfg.theta, est.n, cfg.seed,
        est.value, est.stderr, est.ci_low, est.ci_high, closed,
    )
    table = _write_table(cfg, f"{label}-estimate", fields, [row])
    fig = report.save_estimate_figure(f"{cfg.out}.png", label, est, closed)
    _announce(table, fig)
    ref = "" if closed is None else f", closed form {closed:.6g}"
    print(
        f"{label} = {est.value:.6g} +- {est.stderr:.2g} "
        f"(99% CI {est.ci_low:.6g}..{est.ci_high:.6g}){ref}, "
        f"{est.n} segments, seed {cfg.seed}"
    )
    return 0


def run_rho(cfg: RunConfig) -> int:
    """Estimate the curvature constant, with its closed form when valid."""
    closed = (
        rho_closed_form(cfg.params)
        if cfg.theta <= math.pi / 4.0 + 1.0e-12
        else None
    )
    return _estimate_command(cfg, estimate_rho, "rho", closed)


def run_kappa(cfg: RunConfig) -> int:
    """Estimate the renewal density per unit horizontal span."""
    closed = (
        1.0 / _step_mean_x(cfg.params)
        if cfg.theta <= math.pi / 4.0 + 1.0e-12
        else None
    )
    return _estimate_command(cfg, estimate_kappa, "kappa", closed)


def run_tau_tail(cfg: RunConfig) -> int:
    """Empirical renewal waiting-time tail with its geometric reference."""
    curve = tau_tail(cfg.params, cfg.paths, cfg.seed)
    reference = None
    if cfg.theta > math.pi / 4.0:
        reference = (4.0 * cfg.theta - math.pi) / (4.0 * cfg.theta)
    fields = ("level", "survival", "ci_low", "ci_high")
    rows = list(zip(curve.levels, curve.survival, curve.ci_low, curve.ci_high))
    table = _write_table(cfg, "tau-tail", fields, rows)
    fig = report.save_tail_figure(f"{cfg.out}.png", curve, reference)
    _announce(table, fig)
    note = f", note: {curve.note}" if curve.note else ""
    ref = "" if reference is None else f", geometric bound base {reference:.6g}"
    print(
        f"tau-tail: fitted rate {curve.fitted_rate:.6g} "
        f"(R2 {curve.fit_r2:.4f}){ref}, {cfg.paths} paths, "
        f"seed {cfg.seed}{note}"
    )
    return 0


def _rate_mdp(cfg: RunConfig) -> int:
    if cfg.theta <= math.pi / 4.0 + 1.0e-12:
        rho = rho_closed_form(cfg.params)
        source = "closed form"
    else:
        rho = estimate_rho(cfg.params, cfg.segments, cfg.seed).value
        source = f"MC ({cfg.segments} segments, seed {cfg.seed})"
    rows = [(x, mdp_rate(x, rho)) for x in cfg.xs]
    table = _write_table(cfg, "rate-mdp", ("x", "value"), rows)
    fig = report.save_curve_figure(
        f"{cfg.out}.png",
        [r[0] for r in rows],
        [r[1] for r in rows],
        "slope x",
        "moderate-deviation rate",
    )
    _announce(table, fig)
    print(f"rate mdp: rho = {rho:.6g} from {source}, {len(rows)} point(s)")
    return 0


def _rate_ldp(cfg: RunConfig) -> int:
    fields = (
        "x", "value", "witness_beta", "witness_gamma1", "witness_gamma2",
        "converged",
    )
    rows = []
    for x in cfg.xs:
        rv = ldp_rate(x, cfg.params)
        beta, g1, g2 = rv.witness if rv.witness is not None else (None,) * 3
        rows.append((x, rv.value, beta, g1, g2, rv.converged))
    table = _write_table(cfg, "rate-ldp", fields, rows)
    fig = report.save_curve_figure(
        f"{cfg.out}.png",
        [r[0] for r in rows],
        [r[1] for r in rows],
        "slope x",
        "large-deviation rate",
    )
    _announce(table, fig)
    shown = ", ".join(f"I({x:g})={v:.6g}" for x, v, *_ in rows[:4])
    more = "" if len(rows) <= 4 else f" (+{len(rows) - 4} more)"
    print(f"rate ldp: {shown}{more}")
    return 0


def _rate_dependent(cfg: RunConfig) -> int:
    # Built-in synthetic fixture with a known optimum at a = eps = 1:
    # quadratic segment rate centered at unit slope and a quadratic
    # tail cost scaled by 1/eps.
    def iprime(u, v):
        return (u - 1.0) ** 2 + v * v

    def tail_cost(x, y):
        return (1.0 + x * x + y * y) / cfg.eps

    rv = dependent_ldp_rate(cfg.a, iprime, tail_cost)
    b, c, beta, d = rv.witness if rv.witness is not None else (None,) * 4
    fields = (
        "a", "eps", "value", "witness_b", "witness_c", "witness_beta",
        "witness_d", "converged",
    )
    rows = [(cfg.a, cfg.eps, rv.value, b, c, beta, d, rv.converged)]
    table = _write_table(cfg, "rate-dependent", fields, rows)
    fig = report.save_curve_figure(
        f"{cfg.out}.png",
        [cfg.a],
        [rv.value],
        "displacement a",
        "dependent-case rate",
    )
    _announce(table, fig)
    print(
        f"rate dependent: value {rv.value:.6g} at a={cfg.a:g}, "
        f"eps={cfg.eps:g}, converged={rv.converged}"
    )
    return 0


def run_rate(cfg: RunConfig) -> int:
    """Evaluate the requested deviation rate over the given inputs."""
    if cfg.mode == "mdp":
        return _rate_mdp(cfg)
    if cfg.mode == "ldp":
        return _rate_ldp(cfg)
    return _rate_dependent(cfg)


def _segment_records(cfg: RunConfig, n: int):
    """Collect at least n renewal segments through the public path API."""
    recs = []
    index = 0
    while len(recs) < n:
        path = simulate_path(
            cfg.params,
            steps=2000,
            seed=cfg.seed,
            sampler=cfg.sampler,
            path_index=index,
        )
        recs.extend(segments(path))
        index += 1
    return recs[:n]


def run_cgf(cfg: RunConfig) -> int:
    """Tabulate the exact step CGF, optionally with a segment MC column."""
    grid = cgf_grid(cfg.gammas, params=cfg.params)
    estimates = None
    if cfg.segments > 0:
        recs = _segment_records(cfg, cfg.segments)
        estimates = [segment_cgf_mc(g, recs) for g in cfg.gammas]
    fields = ["gamma1", "gamma2", "value"]
    if estimates is not None:
        fields += ["mc_value", "mc_stderr", "mc_unstable"]
    rows = []
    for i, (g1, g2) in enumerate(cfg.gammas):
        row = [g1, g2, grid.values[i]]
        if estimates is not None:
            est = estimates[i]
            row += [est.value, est.stderr, est.unstable]
        rows.append(tuple(row))
    table = _write_table(cfg, "cgf", tuple(fields), rows)
    g1s = [g for g, _ in cfg.gammas]
    axis_is_g1 = len(set(g1s)) == len(g1s) and len(g1s) > 1
    fig = report.save_curve_figure(
        f"{cfg.out}.png",
        g1s if axis_is_g1 else list(range(len(rows))),
        [r[2] for r in rows],
        "gamma1" if axis_is_g1 else "point index",
        "step CGF",
    )
    _announce(table, fig)
    print(f"cgf: {len(rows)} point(s), exact quadrature" +
          ("" if estimates is None else f" + MC over {cfg.segments} segments"))
    return 0


def run_validate(cfg: RunConfig) -> int:
    """Run the pinned-seed validation suite; nonzero exit on any failure."""
    result = run_checks(cfg.checks or None)
    fields = ("check", "status", "statistic", "threshold", "seed", "detail")
    rows = [
        (c.name, "pass" if c.passed else "fail", c.statistic, c.threshold,
         c.seed, c.detail)
        for c in result.checks
    ]
    table = _write_table(cfg, "validation", fields, rows)
    for c in result.checks:
        status = "PASS" if c.passed else "FAIL"
        print(
            f"{status} {c.name}: statistic={c.statistic:.6g} "
            f"threshold={c.threshold:g} seed={c.seed} {c.detail}"
        )
    _announce(table)
    print(f"validate: overall {'PASS' if result.overall else 'FAIL'} "
          f"({sum(c.passed for c in result.checks)}/{len(result.checks)})")
    return 0 if result.overall else 1


DISPATCH = {
    "simulate": run_simulate,
    "rho": run_rho,
    "kappa": run_kappa,
    "tau-tail": run_tau_tail,
    "rate": run_rate,
    "cgf": run_cgf,
    "validate": run_validate,
}


def main(argv=None) -> int:
    parser = _build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = build_config(ns)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        return DISPATCH[cfg.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
