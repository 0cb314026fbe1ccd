"""Renewal decomposition of navigation paths and estimators built on it.

A step that leaves an empty history is a renewal: the future of the path
is independent of everything before it, so the path splits into iid
segments.  This module builds those segments, estimates the moment
ratios that drive the fluctuation asymptotics, measures the tail of the
first renewal time, and validates an integer Markov chain that dominates
the horizontal extent of the history.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

from .geom import _term_max_x
from .nav import ModelParams, PathEngine, PathSample, steps_before
from .rng import DrawBuffer, stream
from .stats import Z99, fit_log_linear, wilson_interval

MIN_SEGMENTS = 1000

_SEGMENTS_PER_PATH = 64
_MAX_SEGMENT_STEPS = 1_000_000
_TAU_GUARD = 100_000


@dataclass(frozen=True, slots=True)
class SegmentRecord:
    """Aggregate progress between consecutive renewals."""

    Xp: float
    Yp: float
    gap: int


@dataclass(frozen=True, slots=True)
class EstimateWithCI:
    """Point estimate with a 99% normal-approximation interval.

    ``unstable`` marks estimates whose empirical mean is dominated by a
    few extreme summands (set by the exponential-moment estimator); the
    value is still reported but should not be trusted.
    """

    value: float
    stderr: float
    ci_low: float
    ci_high: float
    n: int
    seed: int
    unstable: bool = False


@dataclass(frozen=True, slots=True)
class TailCurve:
    """Empirical survival function of an integer waiting time.

    ``fitted_rate`` is the slope of the least-squares line through
    (n, log survival(n)) over the levels with at least 100 observed
    exceedances; it is negative for an exponentially decaying tail.
    ``note`` flags degenerate or censored curves.
    """

    levels: tuple[int, ...]
    survival: tuple[float, ...]
    ci_low: tuple[float, ...]
    ci_high: tuple[float, ...]
    fitted_rate: float
    fit_r2: float
    n: int
    note: str = ""


@dataclass(frozen=True, slots=True)
class MajorantReport:
    """Outcome of the Markov-majorant validation run."""

    violations: int
    tauM_tail: TailCurve
    n_paths: int
    censored: int


# ---------------------------------------------------------------------------
# paths -> segments


def segments(path: PathSample) -> list[SegmentRecord]:
    """Split a path into renewal segments.

    Each record sums the per-step progress between consecutive renewal
    indices; steps after the last renewal are discarded as an incomplete
    segment.  A path without any renewal yields an empty list, in which
    case the caller should simulate a longer horizon.
    """
    out = []
    prev = 0
    for tau in path.renewal_indices:
        x = 0.0
        y = 0.0
        for rec in path.steps[prev:tau]:
            x += rec.progress_cart.x
            y += rec.progress_cart.y
        out.append(SegmentRecord(x, y, tau - prev))
        prev = tau
    return out


def kprime(path: PathSample, t: float) -> int:
    """Number of renewals that happen within the first t of horizontal span.

    Counts the renewal indices not exceeding the number of whole steps
    strictly before horizontal position t; zero when the first renewal
    lies beyond that point.
    """
    k = steps_before(path, t)
    return bisect_right(path.renewal_indices, k)


# ---------------------------------------------------------------------------
# segment collection for the moment estimators


def _collect_segments(params, n_segments, seed, sampler):
    """Simulate until ``n_segments`` complete segments are available.

    Harvests a bounded number of segments per path, then moves to the
    next substream, so no single trajectory dominates the sample.
    Returns (Xp, Yp, gap) arrays of length exactly ``n_segments``.
    """
    if sampler not in ("points", "inversion"):
        raise ValueError("sampler must be 'points' or 'inversion'")
    xs = np.empty(n_segments)
    ys = np.empty(n_segments)
    gaps = np.empty(n_segments, dtype=np.int64)
    got = 0
    path_index = 0
    while got < n_segments:
        eng = PathEngine(params, DrawBuffer(stream(seed, path_index)))
        step = eng.step_inversion if sampler == "inversion" else eng.step
        in_path = 0
        seg_x = 0.0
        seg_y = 0.0
        seg_start = 0
        while in_path < _SEGMENTS_PER_PATH and got < n_segments:
            r, phi, empty = step()
            seg_x += r * math.cos(phi)
            seg_y += r * math.sin(phi)
            if empty:
                xs[got] = seg_x
                ys[got] = seg_y
                gaps[got] = eng.n - seg_start
                got += 1
                in_path += 1
                seg_x = 0.0
                seg_y = 0.0
                seg_start = eng.n
            elif eng.n - seg_start > _MAX_SEGMENT_STEPS:
                raise RuntimeError(
                    "segment exceeded the step guard without a renewal"
                )
        path_index += 1
    return xs, ys, gaps


def estimate_rho(
    params: ModelParams, n_segments: int, seed: int, *, sampler: str = "points"
) -> EstimateWithCI:
    """Estimate the moderate-deviation curvature constant.

    The target is mean horizontal segment progress divided by twice the
    mean squared vertical segment progress.  The standard error combines
    the two sample variances and their covariance through the delta
    method for the ratio.
    """
    if n_segments < MIN_SEGMENTS:
        raise ValueError(f"need at least {MIN_SEGMENTS} segments")
    xs, ys, _ = _collect_segments(params, n_segments, seed, sampler)
    y2 = ys * ys
    a = xs.mean()
    b = y2.mean()
    value = a / (2.0 * b)
    grad = np.array([1.0 / (2.0 * b), -a / (2.0 * b * b)])
    cov = np.cov(xs, y2)
    var = float(grad @ cov @ grad) / n_segments
    stderr = math.sqrt(max(var, 0.0))
    return EstimateWithCI(
        value,
        stderr,
        value - Z99 * stderr,
        value + Z99 * stderr,
        n_segments,
        seed,
    )


def estimate_kappa(
    params: ModelParams, n_segments: int, seed: int, *, sampler: str = "points"
) -> EstimateWithCI:
    """Estimate the long-run renewal density per unit of horizontal span.

    This is the reciprocal of the mean horizontal segment progress, with
    a delta-method standard error.
    """
    if n_segments < MIN_SEGMENTS:
        raise ValueError(f"need at least {MIN_SEGMENTS} segments")
    xs, _, _ = _collect_segments(params, n_segments, seed, sampler)
    a = xs.mean()
    value = 1.0 / a
    stderr = float(xs.std(ddof=1)) / (a * a * math.sqrt(n_segments))
    return EstimateWithCI(
        value,
        stderr,
        value - Z99 * stderr,
        value + Z99 * stderr,
        n_segments,
        seed,
    )


# ---------------------------------------------------------------------------
# tail curves


def _tail_curve(values, level_max, n, note=""):
    """Empirical survival of integer samples with Wilson bands and a fit.

    ``values`` may exceed ``level_max`` (censored observations); they
    count as exceedances at every reported level.
    """
    values = np.sort(np.asarray(values, dtype=np.int64))
    levels = np.arange(1, level_max + 1, dtype=np.int64)
    exceed = n - np.searchsorted(values, levels, side="right")
    survival = exceed / n
    lows = np.empty(levels.size)
    highs = np.empty(levels.size)
    for i, k in enumerate(exceed):
        lows[i], highs[i] = wilson_interval(int(k), n)
    fit_mask = exceed >= 100
    if int(fit_mask.sum()) >= 2 and np.ptp(levels[fit_mask]) > 0:
        with np.errstate(divide="ignore"):
            log_surv = np.log(survival[fit_mask])
        rate, _, r2 = fit_log_linear(levels[fit_mask], log_surv)
    else:
        rate, r2 = math.nan, math.nan
    return TailCurve(
        tuple(int(v) for v in levels),
        tuple(float(v) for v in survival),
        tuple(float(v) for v in lows),
        tuple(float(v) for v in highs),
        rate,
        r2,
        n,
        note,
    )


def tau_tail(params: ModelParams, n_paths: int, seed: int) -> TailCurve:
    """Tail of the first renewal time over independent paths.

    For cone half-angles up to pi/4 every step is a renewal, so the
    curve is degenerate with survival zero at every positive level.
    Otherwise each path runs until its first renewal and the empirical
    survival gets Wilson bands plus a log-linear decay fit over the
    well-populated levels.
    """
    if n_paths < 1:
        raise ValueError("n_paths must be positive")
    taus = np.empty(n_paths, dtype=np.int64)
    censored = 0
    for k in range(n_paths):
        eng = PathEngine(params, DrawBuffer(stream(seed, k)))
        while True:
            _, _, empty = eng.step()
            if empty:
                taus[k] = eng.n
                break
            if eng.n >= _TAU_GUARD:
                taus[k] = _TAU_GUARD + 1
                censored += 1
                break
    level_max = int(min(taus.max(), _TAU_GUARD))
    if params.theta <= 0.25 * math.pi:
        note = "degenerate"
    elif censored:
        note = f"{censored} of {n_paths} censored at {_TAU_GUARD}"
    else:
        note = ""
    return _tail_curve(taus, level_max, n_paths, note=note)


# ---------------------------------------------------------------------------
# Markov majorant of the history width


def _majorant_update(m, under_r, under_phi, over_r, narrow, cos_t):
    """One transition of the integer chain that dominates history width.

    When the nearest cone point sits within the narrow band (angle at
    most pi/2 - theta) the true step clears at least the floored
    horizontal advance; otherwise the chain absorbs the ceiling of the
    narrow-cone bound on the step length.
    """
    if abs(under_phi) <= narrow:
        m -= int(math.floor(under_r * cos_t))
        return m if m > 0 else 0
    c = int(math.ceil(over_r))
    return m if m >= c else c


def markov_majorant(
    params: ModelParams, n_paths: int, seed: int, *, max_steps: int = 512
) -> MajorantReport:
    """Drive the dominating chain alongside paths and check it never lags.

    Along each path the integer chain M is updated from the coupled
    bracket points of the candidate scan, and two exact comparisons run
    step by step: M must be at least the horizontal width of the current
    history, and M must not hit zero strictly before the first renewal.
    Each path continues until its first renewal has been seen and the
    chain has returned to zero, censoring the latter at ``max_steps``.
    """
    if not 0.25 * math.pi < params.theta:
        raise ValueError("the majorant chain needs theta > pi/4")
    if n_paths < 1:
        raise ValueError("n_paths must be positive")
    narrow = 0.5 * math.pi - params.theta
    sin_t = math.sin(params.theta)
    cos_t = math.cos(params.theta)
    theta = params.theta
    violations = 0
    censored = 0
    tau_m = np.empty(n_paths, dtype=np.int64)
    for k in range(n_paths):
        eng = PathEngine(params, DrawBuffer(stream(seed, k)))
        m = 0
        tau = None
        tau_chain = None
        while True:
            r, phi, empty, under, over = eng.step_coupled()
            m = _majorant_update(m, under[0], under[1], over[0], narrow, cos_t)
            if eng.terms:
                vx = eng.vx
                best = vx
                for ax, ay, cx, cy, rad in eng.terms:
                    cand = _term_max_x(ax, ay, cx, cy, rad, theta, sin_t, cos_t)
                    if cand is not None and cand > best:
                        best = cand
                if m < best - vx:
                    violations += 1
            if tau is None and empty:
                tau = eng.n
            if tau_chain is None and m == 0:
                tau_chain = eng.n
            if tau is not None and (tau_chain is not None or eng.n >= max_steps):
                break
            if eng.n >= _MAX_SEGMENT_STEPS:
                raise RuntimeError("path exceeded the step guard")
        if tau_chain is None:
            tau_m[k] = max_steps + 1
            censored += 1
        else:
            tau_m[k] = tau_chain
            if tau_chain < tau:
                violations += 1
    level_max = int(min(tau_m.max(), max_steps))
    note = f"{censored} of {n_paths} censored at {max_steps}" if censored else ""
    curve = _tail_curve(tau_m, level_max, n_paths, note=note)
    return MajorantReport(violations, curve, n_paths, censored)
