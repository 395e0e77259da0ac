"""Shared fixtures: deterministic synthetic panels.

The panels double as oracles: every statistic asserted downstream is
known by construction. The acceptance module's results are echoed as
one line per criterion at the end of the run.
"""

import pytest

from gdptrend import (ModelParams, NoiseSpec, SplitMix64, generate,
                      increments)

PANEL_COUNTRIES = 19
PANEL_YEARS = 54
PANEL_SIGMA = 359.0


def drawn_increments(seed=20260810, n=PANEL_COUNTRIES, lo=350.0, hi=550.0):
    """Per-country trend increments drawn uniformly in [lo, hi]."""
    rng = SplitMix64(seed)
    return [lo + (hi - lo) * rng.uniform() for _ in range(n)]


def build_series_panel(noise_for, base_level=10000.0, start_year=1950,
                       years=PANEL_YEARS, trend_seed=20260810):
    """One AnnualSeries per country; noise_for(i) gives its NoiseSpec."""
    out = []
    for i, a in enumerate(drawn_increments(seed=trend_seed)):
        params = ModelParams(increment=a, base_level=base_level,
                             base_year=start_year)
        series, _ = generate(params, noise_for(i), years,
                             country=f"C{i:02d}")
        out.append(series)
    return out


def build_panel(noise_for, **kwargs):
    return [increments(s) for s in build_series_panel(noise_for, **kwargs)]


@pytest.fixture(scope="session")
def normal_series_panel():
    """19 x 54 series panel with N(0, 359) increment noise, fixed seeds."""
    return build_series_panel(
        lambda i: NoiseSpec.normal(PANEL_SIGMA, seed=1000 + i))


@pytest.fixture(scope="session")
def normal_panel(normal_series_panel):
    return [increments(s) for s in normal_series_panel]


@pytest.fixture(scope="session")
def mixture_panel():
    """Heavy-tailed panel: 5% of increments drawn at sigma 2000."""
    return build_panel(
        lambda i: NoiseSpec.mixture(200.0, 2000.0, 0.05, seed=2000 + i),
        base_level=50000.0)


_acceptance_results = []


def pytest_runtest_logreport(report):
    if "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call":
        _acceptance_results.append((name, report.outcome))
    elif report.when == "setup" and report.skipped:
        _acceptance_results.append((name, "skipped"))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    tags = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}
    for name, outcome in _acceptance_results:
        terminalreporter.write_line(
            f"{name}: {tags.get(outcome, outcome.upper())}")
