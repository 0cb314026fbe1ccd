"""Tests for the renewal decomposition and its estimators.

The frozen reference constants come from the closed-form step moments
for cone half-angles up to pi/4, where every step is a renewal and the
segment law equals the step law:

    E[R] = sqrt(pi/(4*lam*theta)),  E[R^2] = 1/(lam*theta)
    E[cos Phi] = sin(theta)/theta
    E[sin^2 Phi] = 1/2 - sin(2*theta)/(4*theta)

evaluated two independent ways (moment products and the simplified
ratio) which agree to ten digits.
"""

import math

import numpy as np
import pytest
from scipy import stats as sps

from poisson_nav.nav import (
    ModelParams,
    PathSample,
    StepRecord,
    simulate_path,
)
from poisson_nav.geom import Point, PolarStep
from poisson_nav.renewal import (
    EstimateWithCI,
    MajorantReport,
    SegmentRecord,
    TailCurve,
    _majorant_update,
    estimate_kappa,
    estimate_rho,
    kprime,
    markov_majorant,
    segments,
    tau_tail,
)

QUARTER = 0.25 * math.pi

RHO_QUARTER = 1.9459142997
RHO_SIXTH = 3.5395888620
KAPPA_QUARTER = 1.1107207345
KAPPA_QUARTER_LAM4 = 2.2214414691


def path_with_renewals(increments, renewal_indices, theta=QUARTER):
    """Hand-built path with explicit renewal structure."""
    params = ModelParams(1.0, theta)
    records = []
    renewals = set(renewal_indices)
    for i, (x, y) in enumerate(increments, start=1):
        r = math.hypot(x, y)
        records.append(
            StepRecord(Point(x, y), PolarStep(r, math.atan2(y, x)), i in renewals)
        )
    return PathSample(params, 0, tuple(records), tuple(sorted(renewals)))


# ---------------------------------------------------------------------------
# segments


def test_segments_quarter_angle_every_step():
    path = simulate_path(ModelParams(1.0, QUARTER), steps=100, seed=5)
    segs = segments(path)
    assert len(segs) == 100
    for seg, rec in zip(segs, path.steps):
        assert seg.gap == 1
        assert seg.Xp == rec.progress_cart.x
        assert seg.Yp == rec.progress_cart.y
        assert seg.Xp > 0


def test_segments_partition_example():
    incs = [(1.0, 0.1), (1.0, -0.2), (1.0, 0.3), (1.0, 0.0), (1.0, 0.4), (1.0, 0.5)]
    path = path_with_renewals(incs, [3, 5], theta=0.3 * math.pi)
    segs = segments(path)
    assert [s.gap for s in segs] == [3, 2]
    assert segs[0].Xp == pytest.approx(3.0, abs=1e-15)
    assert segs[0].Yp == pytest.approx(0.1 - 0.2 + 0.3, abs=1e-15)
    assert segs[1].Xp == pytest.approx(2.0, abs=1e-15)
    assert segs[1].Yp == pytest.approx(0.4, abs=1e-15)


def test_segments_empty_without_renewal():
    path = path_with_renewals([(1.0, 0.9)], [], theta=0.4 * math.pi)
    assert segments(path) == []


def test_segment_sums_reconstruct_path():
    path = simulate_path(ModelParams(1.0, 0.45 * math.pi), steps=400, seed=11)
    segs = segments(path)
    assert segs, "horizon too short to observe a renewal"
    last = path.renewal_indices[-1]
    assert sum(s.gap for s in segs) == last
    x_total = math.fsum(s.Xp for s in segs)
    y_total = math.fsum(s.Yp for s in segs)
    x_path = math.fsum(r.progress_cart.x for r in path.steps[:last])
    y_path = math.fsum(r.progress_cart.y for r in path.steps[:last])
    assert x_total == pytest.approx(x_path, rel=1e-10, abs=1e-10)
    assert y_total == pytest.approx(y_path, rel=1e-10, abs=1e-10)


def test_mean_vertical_segment_progress_near_zero():
    ys = []
    for k in range(150):
        path = simulate_path(
            ModelParams(1.0, 0.45 * math.pi), steps=200, seed=77, path_index=k
        )
        ys.extend(s.Yp for s in segments(path))
    ys = np.asarray(ys)
    assert ys.size > 1000
    stderr = ys.std(ddof=1) / math.sqrt(ys.size)
    assert abs(ys.mean()) <= 3.0 * stderr


# ---------------------------------------------------------------------------
# kprime


def test_kprime_examples():
    incs = [(1.0, 0.0)] * 6
    path = path_with_renewals(incs, [3, 5], theta=0.3 * math.pi)
    assert kprime(path, 4.5) == 1
    assert kprime(path, 5.5) == 2
    assert kprime(path, 0.5) == 0
    with pytest.raises(ValueError):
        kprime(path, 0.0)
    with pytest.raises(ValueError):
        kprime(path, -1.0)
    with pytest.raises(ValueError):
        kprime(path, 100.0)


def test_kprime_equals_step_count_at_quarter_angle():
    path = simulate_path(ModelParams(1.0, QUARTER), steps=60, seed=3)
    from poisson_nav.nav import steps_before

    for t in (0.5, 5.0, 20.0, 40.0):
        assert kprime(path, t) == steps_before(path, t)


# ---------------------------------------------------------------------------
# moment estimators


def test_estimate_rho_quarter_angle():
    est = estimate_rho(ModelParams(1.0, QUARTER), 6000, seed=21)
    assert isinstance(est, EstimateWithCI)
    assert est.n == 6000
    assert est.seed == 21
    assert est.stderr > 0
    assert est.ci_low <= est.value <= est.ci_high
    assert abs(est.value - RHO_QUARTER) <= 3.0 * est.stderr


def test_estimate_rho_pi_sixth():
    est = estimate_rho(ModelParams(1.0, math.pi / 6.0), 6000, seed=22)
    assert abs(est.value - RHO_SIXTH) <= 3.0 * est.stderr


def test_estimate_rho_intensity_scaling():
    theta = 0.45 * math.pi
    lo = estimate_rho(ModelParams(1.0, theta), 3000, seed=31)
    hi = estimate_rho(ModelParams(4.0, theta), 3000, seed=32)
    combined = math.hypot(hi.stderr, 2.0 * lo.stderr)
    assert abs(hi.value - 2.0 * lo.value) <= 3.0 * combined


def test_estimate_kappa_values():
    est1 = estimate_kappa(ModelParams(1.0, QUARTER), 5000, seed=41)
    assert abs(est1.value - KAPPA_QUARTER) <= 3.0 * est1.stderr
    est4 = estimate_kappa(ModelParams(4.0, QUARTER), 5000, seed=42)
    assert abs(est4.value - KAPPA_QUARTER_LAM4) <= 3.0 * est4.stderr


def test_estimator_preconditions():
    params = ModelParams(1.0, QUARTER)
    with pytest.raises(ValueError):
        estimate_rho(params, 999, seed=0)
    with pytest.raises(ValueError):
        estimate_kappa(params, 10, seed=0)
    with pytest.raises(ValueError):
        estimate_rho(params, 2000, seed=0, sampler="metropolis")


def test_estimators_deterministic_in_seed():
    params = ModelParams(1.0, 0.4 * math.pi)
    a = estimate_rho(params, 1500, seed=7)
    b = estimate_rho(params, 1500, seed=7)
    c = estimate_rho(params, 1500, seed=8)
    assert a == b
    assert a.value != c.value


def test_sampler_invariance():
    for theta in (QUARTER, 0.375 * math.pi):
        params = ModelParams(1.0, theta)
        pts = estimate_rho(params, 1500, seed=51, sampler="points")
        inv = estimate_rho(params, 1500, seed=52, sampler="inversion")
        assert abs(pts.value - inv.value) <= 3.0 * math.hypot(pts.stderr, inv.stderr)
    wide = ModelParams(1.0, 0.375 * math.pi)
    kp = estimate_kappa(wide, 1500, seed=53, sampler="points")
    ki = estimate_kappa(wide, 1500, seed=54, sampler="inversion")
    assert abs(kp.value - ki.value) <= 3.0 * math.hypot(kp.stderr, ki.stderr)


def test_kprime_concentration():
    # the window leaves only ~0.02 of slack beyond the path-to-path spread,
    # so the reference estimate needs a sample large enough that its own
    # offset stays well inside that slack
    params = ModelParams(1.0, QUARTER)
    kap = estimate_kappa(params, 40000, seed=61)
    t = 1000.0
    inside = 0
    n_paths = 1000
    for k in range(n_paths):
        path = simulate_path(params, time=t, seed=62, path_index=k)
        if abs(kprime(path, t) / t - kap.value) <= 0.05:
            inside += 1
    assert inside >= 0.99 * n_paths


# ---------------------------------------------------------------------------
# gap laws


def test_gap_iid_across_segment_positions():
    first = []
    fifth = []
    for k in range(600):
        path = simulate_path(
            ModelParams(1.0, 0.45 * math.pi), steps=260, seed=71, path_index=k
        )
        segs = segments(path)
        if len(segs) >= 5:
            first.append(segs[0].gap)
            fifth.append(segs[4].gap)
    assert len(first) >= 550
    res = sps.ks_2samp(first, fifth)
    assert res.pvalue > 0.001


# ---------------------------------------------------------------------------
# tau tail


def test_tau_tail_degenerate_at_narrow_angles():
    curve = tau_tail(ModelParams(1.0, 0.2 * math.pi), 200, seed=81)
    assert isinstance(curve, TailCurve)
    assert curve.levels[0] == 1
    assert curve.survival[0] == 0.0
    assert all(s == 0.0 for s in curve.survival)
    assert curve.note == "degenerate"
    curve_q = tau_tail(ModelParams(1.0, QUARTER), 150, seed=82)
    assert curve_q.survival[0] == 0.0


def test_tau_tail_three_eighths():
    curve = tau_tail(ModelParams(1.0, 0.375 * math.pi), 4000, seed=83)
    n = curve.n
    assert n == 4000
    surv = np.asarray(curve.survival)
    assert np.all(np.diff(surv) <= 0)
    assert np.all((surv >= 0) & (surv <= 1))
    for level, s, lo, hi in zip(curve.levels, surv, curve.ci_low, curve.ci_high):
        assert lo <= s <= hi
        if level > 6:
            break
        stderr = math.sqrt(max(s * (1.0 - s), 1e-12) / n)
        assert s >= (1.0 / 3.0) ** level - 3.0 * stderr
    assert curve.fit_r2 >= 0.98
    assert curve.fitted_rate < 0
    assert curve.note == ""


def test_tau_tail_validation():
    with pytest.raises(ValueError):
        tau_tail(ModelParams(1.0, 0.375 * math.pi), 0, seed=0)


# ---------------------------------------------------------------------------
# Markov majorant


def test_majorant_update_arithmetic():
    narrow = 0.5 * math.pi - 0.45 * math.pi
    cos_t = math.cos(0.45 * math.pi)
    # from zero, an in-band draw keeps the chain at zero
    assert _majorant_update(0, 3.7, 0.0, 9.9, narrow, cos_t) == 0
    # out-of-band draws lift the chain to the ceiling of the bracket radius
    assert _majorant_update(0, 1.0, 0.4 * math.pi, 2.3, narrow, cos_t) == 3
    assert _majorant_update(5, 1.0, 0.4 * math.pi, 2.3, narrow, cos_t) == 5
    # in-band draws subtract the floored horizontal advance
    assert _majorant_update(5, 8.0, 0.1, 1.0, narrow, math.cos(0.3 * math.pi)) == 1
    assert _majorant_update(2, 30.0, 0.0, 1.0, narrow, math.cos(0.3 * math.pi)) == 0


def test_markov_majorant_dominates():
    report = markov_majorant(ModelParams(0.5, 0.3 * math.pi), 800, seed=91)
    assert isinstance(report, MajorantReport)
    assert report.violations == 0
    assert report.n_paths == 800
    assert report.censored == 0
    assert report.tauM_tail.fit_r2 >= 0.98
    assert report.tauM_tail.fitted_rate < 0


def test_markov_majorant_wide_angle_censors():
    # at this angle the chain essentially never decrements, so every path
    # whose chain gets lifted off zero runs to the cap
    report = markov_majorant(
        ModelParams(1.0, 0.45 * math.pi), 250, seed=92, max_steps=192
    )
    assert report.violations == 0
    assert report.censored >= 150
    assert "censored" in report.tauM_tail.note


def test_markov_majorant_validation():
    with pytest.raises(ValueError):
        markov_majorant(ModelParams(1.0, 0.2 * math.pi), 10, seed=0)
    with pytest.raises(ValueError):
        markov_majorant(ModelParams(1.0, 0.375 * math.pi), 0, seed=0)
