"""Small statistical helpers shared by the estimation modules.

Confidence intervals are reported at the 99% level throughout the
package; ``Z99`` is the corresponding two-sided normal quantile.
"""

from __future__ import annotations

import math

import numpy as np

Z99 = 2.5758293035489004


def normal_ci(value, stderr, z=Z99):
    """Symmetric normal-approximation confidence interval."""
    return value - z * stderr, value + z * stderr


def wilson_interval(successes, trials, z=Z99):
    """Wilson score interval for a binomial proportion.

    Stays inside [0, 1] and behaves sensibly at the extreme counts 0 and
    ``trials``, which plain Wald intervals do not.
    """
    if trials <= 0:
        raise ValueError("trials must be positive")
    if not 0 <= successes <= trials:
        raise ValueError("successes must lie in [0, trials]")
    n = float(trials)
    p = successes / n
    z2 = z * z
    denom = 1.0 + z2 / n
    center = (p + z2 / (2.0 * n)) / denom
    half = (z / denom) * math.sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n))
    return max(0.0, center - half), min(1.0, center + half)


def dkw_epsilon(n, confidence=0.99):
    """Dvoretzky-Kiefer-Wolfowitz uniform band half-width.

    With probability at least ``confidence`` the empirical CDF of ``n``
    iid samples deviates from the true CDF by less than this amount,
    uniformly over the real line.
    """
    if n <= 0:
        raise ValueError("n must be positive")
    alpha = 1.0 - confidence
    if not 0.0 < alpha < 1.0:
        raise ValueError("confidence must lie in (0, 1)")
    return math.sqrt(math.log(2.0 / alpha) / (2.0 * n))


def fit_log_linear(xs, log_ys):
    """Least-squares line through (x, log y) points.

    Returns ``(slope, intercept, r_squared)``.  With fewer than two
    distinct x values the fit is degenerate and NaNs are returned.
    """
    xs = np.asarray(xs, dtype=float)
    log_ys = np.asarray(log_ys, dtype=float)
    if xs.size < 2 or np.ptp(xs) == 0.0:
        return math.nan, math.nan, math.nan
    slope, intercept = np.polyfit(xs, log_ys, 1)
    resid = log_ys - (slope * xs + intercept)
    ss_res = float(np.dot(resid, resid))
    centered = log_ys - log_ys.mean()
    ss_tot = float(np.dot(centered, centered))
    if ss_tot == 0.0:
        r2 = 1.0 if ss_res == 0.0 else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return float(slope), float(intercept), r2
