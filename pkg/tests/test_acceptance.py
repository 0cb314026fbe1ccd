"""Acceptance suite: one test per statistical/numerical release criterion.

Each test runs the corresponding pinned-seed check from the validation
registry — the same code path the ``validate`` CLI subcommand executes —
prints one ``ACCEPTANCE nn PASS|FAIL`` line with the measured statistic,
and asserts the check passed at its stated tolerance.

The criteria, in registry order:

 1. rho-closed-form     segment estimate within 3 stderr of the closed
                        form at the quarter- and sixth-angle references
 2. scaling             closed-form doubling under 4x intensity to
                        1e-12; MC ratio within the combined 99% CI;
                        rate-function doubling to 1e-6
 3. sampler-marginals   empty-history radius and angle marginals pass
                        KS at p > 0.001 with 1e5 draws
 4. sampler-equivalence inversion and point-process samplers agree on
                        three-step marginals (two-sample KS)
 5. renewal-degeneracy  quarter-angle: every step renews, 1e5 paths,
                        zero exceptions
 6. tau-tail            survival minus 3 stderr stays above the
                        geometric lower bound for levels up to 6 and
                        the log-linear fit has R^2 >= 0.98
 7. sandwich            coupled-radius CDF inside both envelope bands
                        (DKW at 0.999) and pathwise lower <= r <= upper
                        with zero violations over 1e5 steps
 8. narrow-cone         complementary cone of the new vertex misses
                        the whole history ball set at every step of
                        1e4 wide-angle paths
 9. majorant            dominating chain stays above the history count
                        and its renewal time stochastically dominates,
                        zero violations; dominated tail fit R^2 >= 0.98
10. rate-numerics       zero CGF at the origin, Legendre zero at the
                        mean, infinite outside the cone, independent
                        gradient routes to 1e-6, even zero-slope rate
11. clt                 scaled vertical displacement at horizontal
                        time 2000 passes KS against the fitted normal
12. dependent-optimizer nested optimizer reproduces the synthetic
                        closed-form optimum against the grid oracle
13. kprime-concentration renewal counts per unit span concentrate
                        within 0.05 of the estimated density in >= 99%
                        of paths
"""

import pytest

from poisson_nav.validate import CHECKS


def _run_criterion(number: int, name: str) -> None:
    result = CHECKS[name]()
    status = "PASS" if result.passed else "FAIL"
    line = (
        f"ACCEPTANCE {number:02d} {status} {name}: "
        f"statistic={result.statistic:.6g} threshold={result.threshold:g} "
        f"seed={result.seed} {result.detail}"
    )
    print(line)
    assert result.passed, line


def test_criterion_01_rho_closed_form():
    _run_criterion(1, "rho-closed-form")


def test_criterion_02_scaling():
    _run_criterion(2, "scaling")


def test_criterion_03_sampler_marginals():
    _run_criterion(3, "sampler-marginals")


def test_criterion_04_sampler_equivalence():
    _run_criterion(4, "sampler-equivalence")


def test_criterion_05_renewal_degeneracy():
    _run_criterion(5, "renewal-degeneracy")


def test_criterion_06_tau_tail():
    _run_criterion(6, "tau-tail")


def test_criterion_07_sandwich():
    _run_criterion(7, "sandwich")


def test_criterion_08_narrow_cone():
    _run_criterion(8, "narrow-cone")


def test_criterion_09_majorant():
    _run_criterion(9, "majorant")


def test_criterion_10_rate_numerics():
    _run_criterion(10, "rate-numerics")


@pytest.mark.slow
def test_criterion_11_clt():
    _run_criterion(11, "clt")


def test_criterion_12_dependent_optimizer():
    _run_criterion(12, "dependent-optimizer")


def test_criterion_13_kprime_concentration():
    _run_criterion(13, "kprime-concentration")


def test_registry_covers_every_criterion():
    assert list(CHECKS) == [
        "rho-closed-form",
        "scaling",
        "sampler-marginals",
        "sampler-equivalence",
        "renewal-degeneracy",
        "tau-tail",
        "sandwich",
        "narrow-cone",
        "majorant",
        "rate-numerics",
        "clt",
        "dependent-optimizer",
        "kprime-concentration",
    ]
