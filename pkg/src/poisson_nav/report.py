"""Delimited output files and companion figures for the command line.

Every CSV and JSONL file starts with the literal schema header line
``# poisson-nav v1 <schema-name>`` so downstream readers can detect the
format version before parsing; readers must skip leading ``#`` lines.
All serialization is deterministic: floats are written with ``repr``
(shortest round-trip form), rows keep their input order, and figures are
rendered with a fixed backend, size, and dpi so rerunning a command
reproduces each output file byte for byte.
"""

from __future__ import annotations

import csv
import json
import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

SCHEMA_VERSION = "poisson-nav v1"

FIGURE_DPI = 150
FIGURE_SIZE = (6.4, 4.2)
MAX_TRAJECTORIES = 10


def header_line(schema: str) -> str:
    """Versioned schema comment placed as the first line of every file."""
    return f"# {SCHEMA_VERSION} {schema}"


def format_cell(value) -> str:
    """Render one CSV cell deterministically.

    Floats use ``repr`` for shortest round-trip text, booleans map to
    lowercase literals, and ``None`` becomes an empty cell.
    """
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        # plain-float repr also strips numpy scalar wrappers
        return repr(float(value))
    return str(value)


def write_csv(path, schema: str, fields, rows) -> str:
    """Write a header-stamped CSV file and return its path."""
    with open(path, "w", newline="") as fh:
        fh.write(header_line(schema) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(fields)
        for row in rows:
            writer.writerow([format_cell(v) for v in row])
    return str(path)


def write_jsonl(path, schema: str, records) -> str:
    """Write a header-stamped JSON-lines file and return its path.

    The first line is the same ``#`` schema comment used for CSV, so a
    JSONL consumer has to drop leading comment lines before decoding.
    """
    with open(path, "w", newline="") as fh:
        fh.write(header_line(schema) + "\n")
        for record in records:
            fh.write(json.dumps(record, separators=(",", ":")) + "\n")
    return str(path)


def _save(fig, path) -> str:
    fig.savefig(path, dpi=FIGURE_DPI, metadata={"Software": "poisson-nav"})
    plt.close(fig)
    return str(path)


def save_trajectory_figure(path, trajectories, renewal_marks=None) -> str:
    """Plot up to ``MAX_TRAJECTORIES`` cumulative paths with renewal dots.

    ``trajectories`` is a sequence of (xs, ys) vertex arrays including
    the origin; ``renewal_marks`` optionally gives the (xs, ys) of the
    renewal vertices of each path.
    """
    fig, ax = plt.subplots(figsize=FIGURE_SIZE)
    shown = list(trajectories)[:MAX_TRAJECTORIES]
    for i, (xs, ys) in enumerate(shown):
        ax.plot(xs, ys, lw=0.9, alpha=0.85, label=f"path {i}")
        if renewal_marks is not None and i < len(renewal_marks):
            rx, ry = renewal_marks[i]
            ax.plot(rx, ry, ".", ms=3.0, color="black", alpha=0.6)
    ax.set_xlabel("horizontal progress")
    ax.set_ylabel("vertical displacement")
    ax.set_title(f"simulated trajectories (first {len(shown)})")
    if len(shown) <= 5:
        ax.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, path)


def save_estimate_figure(path, label, estimate, reference=None) -> str:
    """Plot a point estimate with its 99% interval as an error bar.

    ``estimate`` carries value/ci_low/ci_high; ``reference`` draws a
    horizontal closed-form line when one applies.
    """
    fig, ax = plt.subplots(figsize=FIGURE_SIZE)
    lo = estimate.value - estimate.ci_low
    hi = estimate.ci_high - estimate.value
    ax.errorbar(
        [0.0],
        [estimate.value],
        yerr=[[lo], [hi]],
        fmt="o",
        capsize=6,
        label=f"estimate (n={estimate.n})",
    )
    if reference is not None:
        ax.axhline(reference, color="tab:red", lw=1.0, ls="--", label="closed form")
    ax.set_xlim(-1.0, 1.0)
    ax.set_xticks([])
    ax.set_ylabel(label)
    ax.set_title(f"{label} with 99% interval")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, path)


def save_tail_figure(path, curve, reference_rate=None) -> str:
    """Plot a log-survival curve with interval bars and its linear fit.

    ``reference_rate`` adds the geometric lower-bound line with the
    given per-level decay factor.
    """
    fig, ax = plt.subplots(figsize=FIGURE_SIZE)
    levels = list(curve.levels)
    surv = list(curve.survival)
    err_lo = [s - lo for s, lo in zip(surv, curve.ci_low)]
    err_hi = [hi - s for s, hi in zip(surv, curve.ci_high)]
    ax.errorbar(
        levels, surv, yerr=[err_lo, err_hi], fmt="o", ms=4, capsize=3,
        label="empirical survival",
    )
    if math.isfinite(curve.fitted_rate):
        pts = [
            (n, math.log(s))
            for n, s in zip(levels, surv)
            if s > 0.0
        ]
        if pts:
            icpt = sum(ly - curve.fitted_rate * n for n, ly in pts) / len(pts)
            ax.plot(
                levels,
                [math.exp(icpt + curve.fitted_rate * n) for n in levels],
                "-",
                color="tab:green",
                lw=1.0,
                label=f"fit rate {curve.fitted_rate:.3f} (R2 {curve.fit_r2:.3f})",
            )
    if reference_rate is not None:
        ax.plot(
            levels,
            [reference_rate**n for n in levels],
            "--",
            color="tab:red",
            lw=1.0,
            label=f"geometric bound {reference_rate:.3f}^n",
        )
    ax.set_yscale("log")
    ax.set_xlabel("level n")
    ax.set_ylabel("survival P(value > n)")
    ax.set_title("waiting-time tail")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, path)


def save_curve_figure(path, xs, ys, xlabel, ylabel, title=None) -> str:
    """Plot a function table, masking non-finite values.

    Infinite or undefined entries are dropped from the line; when any
    are present the subtitle reports how many points were outside the
    finite domain.
    """
    finite = [(x, y) for x, y in zip(xs, ys) if math.isfinite(y)]
    n_dropped = len(list(xs)) - len(finite)
    fig, ax = plt.subplots(figsize=FIGURE_SIZE)
    if finite:
        ax.plot([p[0] for p in finite], [p[1] for p in finite], "o-", ms=4)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    label = title or ylabel
    if n_dropped:
        label = f"{label} ({n_dropped} non-finite point(s) dropped)"
    ax.set_title(label)
    fig.tight_layout()
    return _save(fig, path)
