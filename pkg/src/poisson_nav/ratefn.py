"""Deterministic numerics for the deviation rate functions.

The step law has an explicit exponential-moment integral: the radial
integral reduces in closed form to the scaled complementary error
function, and the angular integral is a fixed Gauss-Legendre rule.  On
top of that sit the Legendre transform (damped Newton), the
one-dimensional composition over the time-change parameter, the
quadratic small-fluctuation rate, the empirical exponential-moment
estimator on renewal segments, and the nested optimizer for the
dependent-coordinates rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

from .nav import ModelParams, PathEngine
from .renewal import EstimateWithCI, SegmentRecord, TailCurve
from .rng import DrawBuffer, stream
from .stats import Z99, fit_log_linear, wilson_interval

_SQRT_PI = math.sqrt(math.pi)
_ANGLE_ORDER = 64
_GRAD_TOL = 1.0e-8
_DIVERGE_NORM = 1.0e6
_VALUE_CAP = 1.0e6
_MAX_NEWTON_ITERS = 200


@dataclass(frozen=True, slots=True)
class CgfGrid:
    """Cumulant generating function sampled on a set of gamma points."""

    points: tuple
    values: tuple
    finite_mask: tuple


@dataclass(frozen=True, slots=True)
class RateValue:
    """Value of a rate function with its optimizer witness.

    ``value`` is nonnegative and may be ``math.inf`` outside the domain
    of finiteness; the witness tuple is present exactly when the value
    is finite.  ``converged`` is False when the optimizer stalled
    without a divergence certificate — callers must treat that as a
    failure, not as infinity.
    """

    value: float
    witness: tuple | None
    converged: bool


# ---------------------------------------------------------------------------
# closed forms


def rho_closed_form(params: ModelParams) -> float:
    """Curvature constant of the small-fluctuation quadratic rate.

    Valid for cone half-angles up to pi/4, where segments are single
    steps and the constant reduces to explicit step moments.
    """
    theta = params.theta
    if theta > 0.25 * math.pi:
        raise ValueError(
            "the closed form needs theta <= pi/4, where every step renews"
        )
    lam = params.intensity
    return (
        math.sqrt(math.pi * lam * theta)
        * math.sin(theta)
        / (2.0 * theta - math.sin(2.0 * theta))
    )


def mdp_rate(x: float, rho: float) -> float:
    """Quadratic rate rho * x**2 of the moderate-deviation regime."""
    if not rho > 0.0:
        raise ValueError("rho must be positive")
    return rho * x * x


# ---------------------------------------------------------------------------
# step cumulant generating function

# For a single step, R has density 2*lam*theta*r*exp(-lam*theta*r^2) and
# the angle is independent uniform on [-theta, theta].  Writing
# a = lam*theta and b(phi) = gamma . (cos phi, sin phi), the radial
# integral of r*exp(-a r^2 + b r) over r > 0 equals g(x)/(2a) with
# x = b/(2 sqrt(a)) and
#
#     g(x) = 1 + sqrt(pi) * x * exp(x^2) * erfc(-x),
#
# so the CGF is the log of the angular average of g(x(phi)).  The
# average is taken against the quadrature weights themselves, which
# makes the value at gamma = 0 exactly zero.


def _log_radial_factor(x):
    """log g(x) for the closed-form radial integral, overflow-safe."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    low = x <= -1.0e4
    xl = x[low]
    out[low] = -np.log(2.0 * xl * xl) + np.log1p(-1.5 / (xl * xl))
    neg = ~low & (x <= 0.0)
    xn = x[neg]
    out[neg] = np.log1p(_SQRT_PI * xn * special.erfcx(-xn))
    big = x >= 25.0
    mid = ~low & ~neg & ~big
    xm = x[mid]
    out[mid] = np.log1p(_SQRT_PI * xm * np.exp(xm * xm) * special.erfc(-xm))
    xb = x[big]
    out[big] = xb * xb + np.log(2.0 * _SQRT_PI * xb)
    return out


def _radial_log_derivative(x):
    """g'(x)/g(x), the logarithmic derivative of the radial factor."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    low = x <= -1.0e4
    xl = x[low]
    out[low] = -2.0 / xl + 3.0 / (xl * xl * xl)
    neg = ~low & (x <= 0.0)
    xn = x[neg]
    en = special.erfcx(-xn)
    out[neg] = (_SQRT_PI * en * (1.0 + 2.0 * xn * xn) + 2.0 * xn) / (
        1.0 + _SQRT_PI * xn * en
    )
    big = x >= 25.0
    mid = ~low & ~neg & ~big
    xm = x[mid]
    em = np.exp(xm * xm) * special.erfc(-xm)
    out[mid] = (_SQRT_PI * em * (1.0 + 2.0 * xm * xm) + 2.0 * xm) / (
        1.0 + _SQRT_PI * xm * em
    )
    xb = x[big]
    out[big] = 2.0 * xb + 1.0 / xb
    return out


def _lse(v):
    """logsumexp for a small dense vector, without dispatch overhead."""
    m = np.max(v)
    if not np.isfinite(m):
        return float(m)
    return float(m) + math.log(float(np.sum(np.exp(v - m))))


@lru_cache(maxsize=64)
def _angle_rule(theta: float):
    """Gauss-Legendre nodes on [-theta, theta] with log weights."""
    nodes, weights = np.polynomial.legendre.leggauss(_ANGLE_ORDER)
    phi = theta * nodes
    logw = np.log(theta * weights)
    return np.cos(phi), np.sin(phi), logw, _lse(logw)


def cgf_step(gamma, params: ModelParams) -> float:
    """Log exponential moment of one step's planar progress.

    Finite for every gamma: the step length has Gaussian-type tails.
    Exactly zero at gamma = (0, 0) by construction of the normalized
    quadrature.
    """
    g1, g2 = gamma
    cos_phi, sin_phi, logw, logw_total = _angle_rule(params.theta)
    scale = 2.0 * math.sqrt(params.intensity * params.theta)
    x = (g1 * cos_phi + g2 * sin_phi) / scale
    return _lse(logw + _log_radial_factor(x)) - logw_total


def cgf_step_gradient(gamma, params: ModelParams):
    """Gradient of the step CGF via the differentiated integrand.

    Independent of the finite-difference derivatives used by the
    Legendre optimizer; the two routes are compared in the tests.
    """
    g1, g2 = gamma
    cos_phi, sin_phi, logw, _ = _angle_rule(params.theta)
    scale = 2.0 * math.sqrt(params.intensity * params.theta)
    x = (g1 * cos_phi + g2 * sin_phi) / scale
    logs = logw + _log_radial_factor(x)
    p = np.exp(logs - _lse(logs))
    h = _radial_log_derivative(x) / scale
    return float(np.sum(p * h * cos_phi)), float(np.sum(p * h * sin_phi))


def cgf_grid(points, params: ModelParams = None, segments=None) -> CgfGrid:
    """Evaluate a CGF over gamma points, exactly or from segment data.

    Exactly one of ``params`` (exact step CGF, always finite) and
    ``segments`` (empirical segment CGF; the finite mask clears where
    the estimate is flagged unstable) must be given.
    """
    pts = tuple((float(a), float(b)) for a, b in points)
    if (params is None) == (segments is None):
        raise ValueError("provide exactly one of params and segments")
    values = []
    mask = []
    for pt in pts:
        if params is not None:
            values.append(cgf_step(pt, params))
            mask.append(True)
        else:
            est = segment_cgf_mc(pt, segments)
            values.append(est.value)
            mask.append(not est.unstable)
    return CgfGrid(pts, tuple(values), tuple(mask))


# ---------------------------------------------------------------------------
# empirical segment CGF


def segment_cgf_mc(gamma, segments) -> EstimateWithCI:
    """Log empirical exponential moment over renewal segments.

    The log-scale standard error comes from the delta method.  The
    segment progress has exponential rather than Gaussian tails, so the
    moment is finite only for small gamma; rather than locating the
    boundary, the estimate is flagged unstable whenever the top 1% of
    summands carries more than half the empirical mass.
    """
    if not segments:
        raise ValueError("segments must be nonempty")
    g1, g2 = gamma
    s = np.array([g1 * seg.Xp + g2 * seg.Yp for seg in segments])
    n = s.size
    smax = s.max()
    w = np.exp(s - smax)
    mean_w = w.mean()
    value = smax + math.log(mean_w)
    if n > 1:
        stderr = float(w.std(ddof=1)) / (mean_w * math.sqrt(n))
    else:
        stderr = math.inf
    top = max(1, math.ceil(0.01 * n))
    w_sorted = np.sort(w)
    unstable = bool(w_sorted[-top:].sum() > 0.5 * w_sorted.sum())
    return EstimateWithCI(
        float(value),
        stderr,
        float(value - Z99 * stderr),
        float(value + Z99 * stderr),
        int(n),
        -1,
        unstable,
    )


# ---------------------------------------------------------------------------
# Legendre transform


def _fd_gradient(obj, g1, g2):
    h1 = 1.0e-5 * (1.0 + abs(g1))
    h2 = 1.0e-5 * (1.0 + abs(g2))
    d1 = (obj(g1 + h1, g2) - obj(g1 - h1, g2)) / (2.0 * h1)
    d2 = (obj(g1, g2 + h2) - obj(g1, g2 - h2)) / (2.0 * h2)
    return d1, d2


def _fd_hessian(obj, g1, g2, f0):
    h1 = 1.0e-4 * (1.0 + abs(g1))
    h2 = 1.0e-4 * (1.0 + abs(g2))
    h11 = (obj(g1 + h1, g2) - 2.0 * f0 + obj(g1 - h1, g2)) / (h1 * h1)
    h22 = (obj(g1, g2 + h2) - 2.0 * f0 + obj(g1, g2 - h2)) / (h2 * h2)
    h12 = (
        obj(g1 + h1, g2 + h2)
        - obj(g1 + h1, g2 - h2)
        - obj(g1 - h1, g2 + h2)
        + obj(g1 - h1, g2 - h2)
    ) / (4.0 * h1 * h2)
    return h11, h12, h22


def legendre(u, cgf, start=None) -> RateValue:
    """Convex conjugate of a CGF at the point u.

    Maximizes the concave map gamma -> <gamma, u> - cgf(gamma) by damped
    Newton iteration on finite-difference derivatives (gradient norm
    tolerance 1e-8, backtracking line search, gradient-ascent fallback
    when the Hessian estimate is not negative definite).  Divergence of
    the iterates past norm 1e6 with the objective still increasing is
    the certificate that u lies outside the domain of finiteness and
    yields the infinite sentinel; stalling without that certificate
    returns the best value found with ``converged`` False.
    """
    u1 = float(u[0])
    u2 = float(u[1])

    def obj(g1, g2):
        return u1 * g1 + u2 * g2 - cgf((g1, g2))

    g1, g2 = (0.0, 0.0) if start is None else (float(start[0]), float(start[1]))
    f_cur = obj(g1, g2)
    for _ in range(_MAX_NEWTON_ITERS):
        d1, d2 = _fd_gradient(obj, g1, g2)
        if math.hypot(d1, d2) <= _GRAD_TOL:
            return RateValue(max(f_cur, 0.0), (g1, g2), True)
        h11, h12, h22 = _fd_hessian(obj, g1, g2, f_cur)
        det = h11 * h22 - h12 * h12
        if h11 < 0.0 and det > 0.0:
            s1 = -(h22 * d1 - h12 * d2) / det
            s2 = -(h11 * d2 - h12 * d1) / det
        else:
            s1, s2 = d1, d2
        slope = d1 * s1 + d2 * s2
        if slope <= 0.0:
            s1, s2 = d1, d2
            slope = d1 * d1 + d2 * d2
        alpha = 1.0
        moved = False
        for _ in range(60):
            t1 = g1 + alpha * s1
            t2 = g2 + alpha * s2
            f_new = obj(t1, t2)
            if f_new >= f_cur + 1.0e-4 * alpha * slope:
                moved = True
                break
            alpha *= 0.5
        if moved and alpha == 1.0:
            # On a ridge that climbs forever the unit step keeps
            # succeeding; expand it so divergence is certified quickly
            # instead of crawling toward the norm threshold.
            while alpha < 1.0e30:
                t1 = g1 + 2.0 * alpha * s1
                t2 = g2 + 2.0 * alpha * s2
                f_try = obj(t1, t2)
                if not (
                    math.isfinite(f_try)
                    and f_try > f_new
                    and f_try >= f_cur + 2.0e-4 * alpha * slope
                ):
                    break
                alpha *= 2.0
                f_new = f_try
            t1 = g1 + alpha * s1
            t2 = g2 + alpha * s2
        if not moved:
            t1 = g1 + s1
            t2 = g2 + s2
            f_new = obj(t1, t2)
            if not (math.isfinite(f_new) and f_new > f_cur):
                return RateValue(max(f_cur, 0.0), (g1, g2), False)
        f_prev = f_cur
        g1, g2, f_cur = t1, t2, f_new
        if math.hypot(g1, g2) > _DIVERGE_NORM:
            if f_cur > f_prev:
                return RateValue(math.inf, None, True)
            return RateValue(max(f_cur, 0.0), (g1, g2), False)
    return RateValue(max(f_cur, 0.0), (g1, g2), False)


# ---------------------------------------------------------------------------
# one-dimensional composition over the time-change parameter


def _min_on_log_bracket(fun, lo, hi, coarse=25, refine_iters=50):
    """Minimize a positive-argument function on a log-spaced bracket.

    Coarse geometric scan followed by golden-section refinement around
    the best scan cell.  Returns (value, argmin); argmin is None when
    every evaluation was infinite.
    """
    la = math.log(lo)
    step = (math.log(hi) - la) / (coarse - 1)
    best_v = math.inf
    best_i = 0
    for i in range(coarse):
        v = fun(math.exp(la + i * step))
        if not math.isnan(v) and v < best_v:
            best_v, best_i = v, i
    if not math.isfinite(best_v):
        return math.inf, None
    best_t = math.exp(la + best_i * step)
    a = la + max(best_i - 1, 0) * step
    b = la + min(best_i + 1, coarse - 1) * step
    invphi = 0.5 * (math.sqrt(5.0) - 1.0)
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc = fun(math.exp(c))
    fd = fun(math.exp(d))
    for _ in range(refine_iters):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fun(math.exp(c))
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fun(math.exp(d))
    for t, v in ((math.exp(c), fc), (math.exp(d), fd)):
        if v < best_v:
            best_v, best_t = float(v), float(t)
    return best_v, best_t


def _step_mean_x(params: ModelParams) -> float:
    theta = params.theta
    return (
        math.sqrt(math.pi / (4.0 * params.intensity * theta))
        * math.sin(theta)
        / theta
    )


def ldp_rate(x: float, params: ModelParams) -> RateValue:
    """Large-deviation rate of the vertical displacement slope.

    Composes the planar step rate over the inverse speed parameter:
    the infimum over beta > 0 of beta times the Legendre transform at
    (1/beta, x/beta).  Valid for cone half-angles up to pi/4.  The
    argument pair lies inside the open cone exactly when |x| < tan
    theta, so outside that range the value is infinite.
    """
    theta = params.theta
    if theta > 0.25 * math.pi:
        raise ValueError("the composition formula needs theta <= pi/4")
    x = float(x)
    if abs(x) >= math.tan(theta):
        return RateValue(math.inf, None, True)

    def cgf(gamma):
        return cgf_step(gamma, params)

    kappa = 1.0 / _step_mean_x(params)
    warm = {"start": None}

    def g_of_beta(beta):
        rv = legendre((1.0 / beta, x / beta), cgf, start=warm["start"])
        if rv.witness is not None:
            warm["start"] = rv.witness
        return beta * rv.value

    _, beta = _min_on_log_bracket(
        g_of_beta, 1.0e-3 * kappa, 1.0e3 * kappa, coarse=25, refine_iters=30
    )
    final = legendre((1.0 / beta, x / beta), cgf, start=warm["start"])
    value = max(beta * final.value, 0.0)
    if final.witness is None:
        return RateValue(value, None, False)
    witness = (beta, final.witness[0], final.witness[1])
    return RateValue(value, witness, final.converged)


# ---------------------------------------------------------------------------
# dependent-coordinates rate


def _as_cost(v):
    v = float(v)
    return math.inf if math.isnan(v) else v


def dependent_ldp_rate(a: float, Iprime, H) -> RateValue:
    """Nested optimization for the dependent-coordinates displacement rate.

    Splits the displacement ``a`` into a segment part b at segment-time
    fraction c and a final incomplete-segment part, each compressed by
    its own positive time-change variable: the segment variable beta and
    the tail variable d run over the log bracket [1e-4, 1e4]*(1+|a|) by
    coarse scan plus golden section, and the outer pair (b, c) over a
    101 x 99 grid on [a-5|a|-5, a+5|a|+5] x (0.01, 0.99) refined by a
    clamped pattern search (c stays within [1e-6, 1-1e-6]).  Returns the
    infinite sentinel when every grid evaluation exceeds the cap 1e6.
    """
    a = float(a)
    scale = 1.0 + abs(a)
    lo = 1.0e-4 * scale
    hi = 1.0e4 * scale

    def inner_seg(b, c, coarse, iters):
        return _min_on_log_bracket(
            lambda beta: beta * _as_cost(Iprime(c / beta, b / beta)),
            lo,
            hi,
            coarse=coarse,
            refine_iters=iters,
        )

    def inner_pen(b, c, coarse, iters):
        return _min_on_log_bracket(
            lambda d: d * _as_cost(H((1.0 - c) / d, (a - b) / d)),
            lo,
            hi,
            coarse=coarse,
            refine_iters=iters,
        )

    def total(b, c, coarse, iters):
        v1, t1 = inner_seg(b, c, coarse, iters)
        if not math.isfinite(v1):
            return math.inf, None, None
        v2, t2 = inner_pen(b, c, coarse, iters)
        if not math.isfinite(v2):
            return math.inf, None, None
        return v1 + v2, t1, t2

    span = 5.0 * abs(a) + 5.0
    best = (math.inf, None, None)
    best_bc = None
    for b in np.linspace(a - span, a + span, 101):
        for c in np.linspace(0.01, 0.99, 99):
            v, _, _ = total(b, c, coarse=11, iters=12)
            if v < best[0]:
                best = (v, None, None)
                best_bc = (float(b), float(c))
    if best_bc is None or best[0] >= _VALUE_CAP:
        return RateValue(math.inf, None, True)

    b, c = best_bc
    cur, beta, dvar = total(b, c, coarse=25, iters=50)
    step_b = 2.0 * span / 100.0
    step_c = 0.98 / 98.0
    c_lo, c_hi = 1.0e-6, 1.0 - 1.0e-6
    for _ in range(400):
        improved = False
        for nb, nc in (
            (b + step_b, c),
            (b - step_b, c),
            (b, min(c + step_c, c_hi)),
            (b, max(c - step_c, c_lo)),
        ):
            v, t1, t2 = total(nb, nc, coarse=25, iters=50)
            if v < cur:
                b, c, cur, beta, dvar = nb, nc, v, t1, t2
                improved = True
                break
        if not improved:
            step_b *= 0.5
            step_c *= 0.5
            if step_b < 1.0e-7 * scale and step_c < 1.0e-7:
                break
    if not math.isfinite(cur):
        return RateValue(math.inf, None, True)
    return RateValue(max(cur, 0.0), (b, c, beta, dvar), True)


# ---------------------------------------------------------------------------
# naive within-segment tail estimator


def naive_H_estimate(
    a: float,
    b: float,
    params: ModelParams,
    t_levels,
    n_paths: int,
    seed: int,
) -> TailCurve:
    """Naive Monte Carlo estimate of the within-segment tail exponent.

    For each integer level t, measures the probability that a path
    accumulates horizontal progress at least a*t and vertical progress
    at least b*t over its first t steps while the first renewal still
    lies beyond t.  The curve stores those probabilities with Wilson
    bands; the fitted log-slope over well-populated levels is the tail
    exponent estimate, flagged "naive" because the event probability
    decays exponentially and plain counting is only a desk-scale probe.
    """
    theta = params.theta
    if not 0.25 * math.pi < theta:
        raise ValueError("the within-segment tail needs theta > pi/4")
    if not (a > 0.0 and b > 0.0):
        raise ValueError("progress slopes a and b must be positive")
    if n_paths < 1:
        raise ValueError("n_paths must be positive")
    levels = []
    for t in t_levels:
        if t < 1 or t != int(t):
            raise ValueError("t_levels must be positive integers")
        levels.append(int(t))
    if not levels:
        raise ValueError("t_levels must be nonempty")
    survival = []
    lows = []
    highs = []
    hit_counts = []
    for li, t in enumerate(levels):
        hits = 0
        for k in range(n_paths):
            eng = PathEngine(params, DrawBuffer(stream(seed, li * n_paths + k)))
            sx = 0.0
            sy = 0.0
            alive = True
            for _ in range(t):
                r, phi, empty = eng.step()
                sx += r * math.cos(phi)
                sy += r * math.sin(phi)
                if empty:
                    alive = False
                    break
            if alive and sx >= a * t and sy >= b * t:
                hits += 1
        p = hits / n_paths
        lo_ci, hi_ci = wilson_interval(hits, n_paths)
        survival.append(p)
        lows.append(lo_ci)
        highs.append(hi_ci)
        hit_counts.append(hits)
    fit_t = [t for t, h in zip(levels, hit_counts) if h >= 100]
    fit_p = [p for p, h in zip(survival, hit_counts) if h >= 100]
    if len(fit_t) >= 2:
        rate, _, r2 = fit_log_linear(fit_t, np.log(fit_p))
    else:
        rate, r2 = math.nan, math.nan
    note = "naive"
    misses = [str(t) for t, h in zip(levels, hit_counts) if h == 0]
    if misses:
        note += "; NO_HITS at t=" + ",".join(misses)
    return TailCurve(
        tuple(levels),
        tuple(survival),
        tuple(lows),
        tuple(highs),
        rate,
        r2,
        int(n_paths),
        note,
    )
