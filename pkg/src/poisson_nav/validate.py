"""Bundled validation suite: every statistical acceptance check.

Each check is a zero-argument function returning a CheckResult with the
measured statistic, the threshold it was held to, and the pinned seed.
The registry order matches the numbered acceptance list; the CLI
``validate`` subcommand and the acceptance tests both call into this
module, so there is exactly one definition of "passing".
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats as sps

from .fixtures import (
    CHECK_FIXTURES,
    FIT_R2_FLOOR,
    KS_P_FLOOR,
    MAJORANT_THETA,
    QUARTER_THETA,
    SIXTH_THETA,
    TAIL_THETA,
    WIDE_THETA,
    Z_99,
)
from .geom import Point, cones_ball_disjoint
from .nav import ModelParams, PathEngine, simulate_path
from .ratefn import (
    cgf_step,
    cgf_step_gradient,
    dependent_ldp_rate,
    ldp_rate,
    legendre,
    rho_closed_form,
)
from .renewal import (
    estimate_kappa,
    estimate_rho,
    kprime,
    markov_majorant,
    tau_tail,
)
from .rng import DrawBuffer, stream
from .stats import dkw_epsilon


@dataclass(frozen=True, slots=True)
class CheckResult:
    """Outcome of one validation check."""

    name: str
    passed: bool
    statistic: float
    threshold: float
    seed: int
    detail: str = ""


@dataclass(frozen=True, slots=True)
class ValidationReport:
    """All check outcomes; overall is their conjunction."""

    checks: tuple
    overall: bool


def build_report(checks) -> ValidationReport:
    checks = tuple(checks)
    return ValidationReport(checks, all(c.passed for c in checks))


def _engine(params, seed, path_index=0):
    return PathEngine(params, DrawBuffer(stream(seed, path_index)))


def check_rho_closed_form() -> CheckResult:
    """Monte Carlo rho matches the closed form at two renewing angles."""
    fx = CHECK_FIXTURES["rho-closed-form"]
    worst = 0.0
    details = []
    for label, theta in (("quarter", QUARTER_THETA), ("sixth", SIXTH_THETA)):
        params = ModelParams(1.0, theta)
        seed = fx["seeds"][label]
        est = estimate_rho(params, fx["n_segments"], seed)
        ref = rho_closed_form(params)
        z = abs(est.value - ref) / est.stderr
        worst = max(worst, z)
        details.append(f"{label}: rho={est.value:.5f} ref={ref:.5f} z={z:.2f}")
    return CheckResult(
        "rho-closed-form",
        worst <= 3.0,
        worst,
        3.0,
        fx["seeds"]["quarter"],
        "; ".join(details),
    )


def check_scaling() -> CheckResult:
    """Intensity scaling: closed form exactly, Monte Carlo and the
    displacement rate within their stated tolerances."""
    fx = CHECK_FIXTURES["scaling"]
    one = rho_closed_form(ModelParams(1.0, QUARTER_THETA))
    four = rho_closed_form(ModelParams(4.0, QUARTER_THETA))
    closed_ok = abs(four - 2.0 * one) <= fx["closed_form_tol"] * one

    wide_one = estimate_rho(
        ModelParams(1.0, WIDE_THETA), fx["n_segments"], fx["seeds"]["one"]
    )
    wide_four = estimate_rho(
        ModelParams(4.0, WIDE_THETA), fx["n_segments"], fx["seeds"]["four"]
    )
    z = abs(wide_four.value - 2.0 * wide_one.value) / math.hypot(
        wide_four.stderr, 2.0 * wide_one.stderr
    )
    mc_ok = z <= Z_99

    x = fx["ldp_x"]
    rate_one = ldp_rate(x, ModelParams(1.0, QUARTER_THETA))
    rate_four = ldp_rate(x, ModelParams(4.0, QUARTER_THETA))
    ldp_gap = abs(rate_four.value - 2.0 * rate_one.value)
    ldp_ok = ldp_gap <= fx["ldp_tol"]

    return CheckResult(
        "scaling",
        closed_ok and mc_ok and ldp_ok,
        z,
        Z_99,
        fx["seeds"]["one"],
        f"closed_ok={closed_ok} mc_z={z:.2f} ldp_gap={ldp_gap:.2e}",
    )


def check_sampler_marginals() -> CheckResult:
    """Empty-history step marginals: squared-radius exponential law and
    uniform angle, by KS test at a renewing angle."""
    fx = CHECK_FIXTURES["sampler-marginals"]
    params = ModelParams(1.0, QUARTER_THETA)
    eng = _engine(params, fx["seed"])
    n = fx["n_draws"]
    rs = np.empty(n)
    phis = np.empty(n)
    for i in range(n):
        r, phi, empty = eng.step()
        rs[i] = r
        phis[i] = phi
        assert empty
    lam_t = params.intensity * params.theta
    p_r = sps.kstest(rs, lambda r: 1.0 - np.exp(-lam_t * r * r)).pvalue
    p_phi = sps.kstest(
        phis, lambda p: (p + params.theta) / (2.0 * params.theta)
    ).pvalue
    worst = min(p_r, p_phi)
    return CheckResult(
        "sampler-marginals",
        worst > KS_P_FLOOR,
        worst,
        KS_P_FLOOR,
        fx["seed"],
        f"p_radius={p_r:.3f} p_angle={p_phi:.3f}",
    )


def check_sampler_equivalence() -> CheckResult:
    """The two step samplers draw from the same law: two-sample KS on
    the position after three steps at a wide angle."""
    fx = CHECK_FIXTURES["sampler-equivalence"]
    params = ModelParams(1.0, WIDE_THETA)
    samples = {}
    for sampler in ("points", "inversion"):
        seed = fx["seeds"][sampler]
        xs = np.empty(fx["n_paths"])
        ys = np.empty(fx["n_paths"])
        for k in range(fx["n_paths"]):
            path = simulate_path(
                params, steps=fx["n_steps"], seed=seed, sampler=sampler,
                path_index=k,
            )
            xs[k] = math.fsum(s.progress_cart.x for s in path.steps)
            ys[k] = math.fsum(s.progress_cart.y for s in path.steps)
        samples[sampler] = (xs, ys)
    p_x = sps.ks_2samp(samples["points"][0], samples["inversion"][0]).pvalue
    p_y = sps.ks_2samp(samples["points"][1], samples["inversion"][1]).pvalue
    worst = min(p_x, p_y)
    return CheckResult(
        "sampler-equivalence",
        worst > KS_P_FLOOR,
        worst,
        KS_P_FLOOR,
        fx["seeds"]["points"],
        f"p_x={p_x:.3f} p_y={p_y:.3f}",
    )


def check_renewal_degeneracy() -> CheckResult:
    """At theta = pi/4 every step is a renewal, with zero exceptions."""
    fx = CHECK_FIXTURES["renewal-degeneracy"]
    params = ModelParams(1.0, QUARTER_THETA)
    exceptions = 0
    for k in range(fx["n_paths"]):
        eng = _engine(params, fx["seed"], k)
        for _ in range(fx["n_steps"]):
            _, _, empty = eng.step()
            if not empty:
                exceptions += 1
    return CheckResult(
        "renewal-degeneracy",
        exceptions == 0,
        float(exceptions),
        0.0,
        fx["seed"],
        f"{fx['n_paths']} paths x {fx['n_steps']} steps",
    )


def check_tau_tail() -> CheckResult:
    """Renewal-time tail at theta = 3pi/8: per-level lower bound
    (1/3)^n - 3 stderr and a straight log-survival fit."""
    fx = CHECK_FIXTURES["tau-tail"]
    params = ModelParams(1.0, TAIL_THETA)
    curve = tau_tail(params, fx["n_paths"], fx["seed"])
    n = curve.n
    bound_ok = True
    for level, p in zip(curve.levels, curve.survival):
        if level > fx["bound_levels"]:
            break
        se = math.sqrt(max(p * (1.0 - p), 1e-12) / n)
        if p < (1.0 / 3.0) ** level - 3.0 * se:
            bound_ok = False
    r2_ok = curve.fit_r2 >= FIT_R2_FLOOR
    return CheckResult(
        "tau-tail",
        bound_ok and r2_ok,
        curve.fit_r2,
        FIT_R2_FLOOR,
        fx["seed"],
        f"bound_ok={bound_ok} fit_r2={curve.fit_r2:.4f}",
    )


def check_sandwich() -> CheckResult:
    """Coupling envelopes: pathwise under <= step <= over radii, and the
    empirical radius survival lies between the two closed-form envelopes
    within DKW bands."""
    fx = CHECK_FIXTURES["sandwich"]
    params = ModelParams(1.0, WIDE_THETA)
    eng = _engine(params, fx["seed"])
    n = fx["n_steps"]
    rs = np.empty(n)
    violations = 0
    for i in range(n):
        r, phi, _, under, over = eng.step_coupled()
        rs[i] = r
        if not (under[0] <= r <= over[0]):
            violations += 1
    eps = dkw_epsilon(n, fx["confidence"])
    lam = params.intensity
    theta = params.theta
    narrow = 0.5 * math.pi - theta
    order = np.sort(rs)
    # Survival just left of each sorted point is (n - i) / n and just
    # right of it is (n - i - 1) / n; the fast-decay envelope must not
    # exceed the former by eps, the slow-decay one must not fall below
    # the latter by eps.
    surv_left = (n - np.arange(n)) / n
    surv_right = (n - np.arange(n) - 1.0) / n
    lower_env = np.exp(-lam * theta * order * order)
    upper_env = np.exp(-lam * narrow * order * order)
    breaches = int(np.sum(lower_env > surv_left + eps)) + int(
        np.sum(upper_env < surv_right - eps)
    )
    total = violations + breaches
    return CheckResult(
        "sandwich",
        total == 0,
        float(total),
        0.0,
        fx["seed"],
        f"pathwise={violations} envelope_breaches={breaches} eps={eps:.4f}",
    )


def check_narrow_cone() -> CheckResult:
    """The narrow cone at the current vertex misses the entire history,
    as an exact geometric assertion at every step."""
    fx = CHECK_FIXTURES["narrow-cone"]
    params = ModelParams(1.0, WIDE_THETA)
    narrow = 0.5 * math.pi - params.theta
    violations = 0
    checked = 0
    for k in range(fx["n_paths"]):
        eng = _engine(params, fx["seed"], k)
        for _ in range(fx["n_steps"]):
            eng.step()
            vertex = Point(eng.vx, eng.vy)
            for ax, ay, cx, cy, rad in eng.terms:
                checked += 1
                if not cones_ball_disjoint(
                    vertex,
                    narrow,
                    Point(ax, ay),
                    params.theta,
                    Point(cx, cy),
                    rad,
                ):
                    violations += 1
    return CheckResult(
        "narrow-cone",
        violations == 0,
        float(violations),
        0.0,
        fx["seed"],
        f"{checked} term checks",
    )


def check_majorant() -> CheckResult:
    """Markov majorant dominates the history width and its hitting time
    dominates the renewal time, with a straight tail fit."""
    fx = CHECK_FIXTURES["majorant"]
    params = ModelParams(0.5, MAJORANT_THETA)
    report = markov_majorant(params, fx["n_paths"], fx["seed"])
    r2_ok = report.tauM_tail.fit_r2 >= FIT_R2_FLOOR
    return CheckResult(
        "majorant",
        report.violations == 0 and r2_ok,
        report.tauM_tail.fit_r2,
        FIT_R2_FLOOR,
        fx["seed"],
        f"violations={report.violations} censored={report.censored} "
        f"fit_r2={report.tauM_tail.fit_r2:.4f}",
    )


def check_rate_numerics() -> CheckResult:
    """Rate-function basics: CGF normalization, Legendre at the mean and
    outside the cone, gradient route agreement, and the displacement
    rate at zero with its symmetry."""
    fx = CHECK_FIXTURES["rate-numerics"]
    tol = fx["tol"]
    params = ModelParams(1.0, QUARTER_THETA)
    worst = 0.0
    ok = cgf_step((0.0, 0.0), params) == 0.0

    mean_x = math.sqrt(math.pi / (4.0 * params.theta)) * math.sin(
        params.theta
    ) / params.theta
    at_mean = legendre((mean_x, 0.0), lambda g: cgf_step(g, params))
    worst = max(worst, at_mean.value)
    ok = ok and at_mean.value <= tol

    outside = legendre((1.0, 1.5), lambda g: cgf_step(g, params))
    ok = ok and math.isinf(outside.value)

    for g1, g2 in fx["gradient_points"]:
        a1, a2 = cgf_step_gradient((g1, g2), params)
        h1 = 1e-6 * (1.0 + abs(g1))
        h2 = 1e-6 * (1.0 + abs(g2))
        f1 = (
            cgf_step((g1 + h1, g2), params) - cgf_step((g1 - h1, g2), params)
        ) / (2.0 * h1)
        f2 = (
            cgf_step((g1, g2 + h2), params) - cgf_step((g1, g2 - h2), params)
        ) / (2.0 * h2)
        gap = max(abs(a1 - f1), abs(a2 - f2))
        worst = max(worst, gap)
        ok = ok and gap <= tol

    at_zero = ldp_rate(0.0, params)
    worst = max(worst, at_zero.value)
    ok = ok and at_zero.value <= tol
    x = fx["even_x"]
    even_gap = abs(ldp_rate(x, params).value - ldp_rate(-x, params).value)
    worst = max(worst, even_gap)
    ok = ok and even_gap <= tol

    return CheckResult(
        "rate-numerics",
        ok,
        worst,
        tol,
        0,
        f"worst discrepancy {worst:.2e}",
    )


def check_clt() -> CheckResult:
    """Vertical displacement at a long horizon is asymptotically normal
    with variance 1/(2 rho): KS test of Y_t/sqrt(t) against that normal
    at a wide angle."""
    fx = CHECK_FIXTURES["clt"]
    params = ModelParams(1.0, WIDE_THETA)
    rho_hat = estimate_rho(
        params, fx["n_segments"], fx["seeds"]["rho"]
    ).value
    n = fx["n_paths"]
    t = float(fx["t"])
    seed = fx["seeds"]["paths"]
    ys = np.empty(n)
    for k in range(n):
        eng = _engine(params, seed, k)
        x = 0.0
        y = 0.0
        while True:
            r, phi, _ = eng.step()
            dx = r * math.cos(phi)
            dy = r * math.sin(phi)
            if x + dx >= t:
                # height of the trajectory where it crosses horizontal
                # position t, not at the step landing beyond it
                ys[k] = y + (t - x) / dx * dy
                break
            x += dx
            y += dy
    scaled = ys / math.sqrt(t)
    sigma = math.sqrt(1.0 / (2.0 * rho_hat))
    p = sps.kstest(scaled, lambda v: sps.norm.cdf(v, loc=0.0, scale=sigma)).pvalue
    return CheckResult(
        "clt",
        p > KS_P_FLOOR,
        p,
        KS_P_FLOOR,
        seed,
        f"rho_hat={rho_hat:.4f} sigma={sigma:.4f} p={p:.3f}",
    )


def check_dependent_optimizer() -> CheckResult:
    """Synthetic nested optimization reproduces the hand value against
    the pre-built grid oracle."""
    fx = CHECK_FIXTURES["dependent-optimizer"]
    rv = dependent_ldp_rate(
        1.0,
        lambda u, v: (u - 1.0) ** 2 + v * v,
        lambda x, y: 1.0 + x * x + y * y,
    )
    limit = 2.0 * math.sqrt(2.0) - 2.0
    gap_limit = abs(rv.value - limit)
    gap_oracle = abs(rv.value - fx["grid_oracle"])
    ok = gap_limit <= fx["tol"] and gap_oracle <= fx["tol"] and rv.converged
    return CheckResult(
        "dependent-optimizer",
        ok,
        gap_limit,
        fx["tol"],
        0,
        f"value={rv.value:.6f} limit={limit:.6f} oracle={fx['grid_oracle']:.6f}",
    )


def check_kprime_concentration() -> CheckResult:
    """The renewal count through horizontal time t concentrates: the
    per-path rate sits within the window of the estimated kappa in at
    least 99% of paths."""
    fx = CHECK_FIXTURES["kprime-concentration"]
    params = ModelParams(1.0, QUARTER_THETA)
    kappa_hat = estimate_kappa(
        params, fx["n_segments"], fx["seeds"]["kappa"]
    ).value
    t = fx["t"]
    inside = 0
    for k in range(fx["n_paths"]):
        path = simulate_path(
            params, time=t, seed=fx["seeds"]["paths"], path_index=k
        )
        rate = kprime(path, t) / t
        if abs(rate - kappa_hat) <= fx["window"]:
            inside += 1
    return CheckResult(
        "kprime-concentration",
        inside >= fx["min_inside"],
        float(inside),
        float(fx["min_inside"]),
        fx["seeds"]["paths"],
        f"kappa_hat={kappa_hat:.4f} inside={inside}/{fx['n_paths']}",
    )


CHECKS = {
    "rho-closed-form": check_rho_closed_form,
    "scaling": check_scaling,
    "sampler-marginals": check_sampler_marginals,
    "sampler-equivalence": check_sampler_equivalence,
    "renewal-degeneracy": check_renewal_degeneracy,
    "tau-tail": check_tau_tail,
    "sandwich": check_sandwich,
    "narrow-cone": check_narrow_cone,
    "majorant": check_majorant,
    "rate-numerics": check_rate_numerics,
    "clt": check_clt,
    "dependent-optimizer": check_dependent_optimizer,
    "kprime-concentration": check_kprime_concentration,
}


def run_checks(names=None) -> ValidationReport:
    """Run the named checks (all by default) in registry order."""
    if names is None:
        selected = list(CHECKS)
    else:
        unknown = [n for n in names if n not in CHECKS]
        if unknown:
            raise ValueError(
                "unknown check names: " + ", ".join(sorted(unknown))
            )
        selected = [n for n in CHECKS if n in set(names)]
    return build_report(CHECKS[name]() for name in selected)
