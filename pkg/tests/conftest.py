"""Shared builders for normalized-unit sources (ω_p = 1)."""
import math

import pytest

from autophase.dispersion import C, QpmCollinearSource, TaylorDispersion, solve_poling_period
from autophase.figures import fig3_sources
from autophase.franson import CollinearFamily, CounterpropFamily
from autophase.jsa import PumpPulse

WP = 1.0
TAU = 20.0


def collinear_family(b2=0.0, pump_b1=1.0, tau=TAU):
    """Type-II-like normalized collinear source; GVM holds when pump_b1 = 1."""
    src = QpmCollinearSource(
        TaylorDispersion(WP, (2.0, pump_b1, b2)),
        TaylorDispersion(WP / 2, (0.0, 0.5, b2)),
        TaylorDispersion(WP / 2, (0.0, 1.5, b2)),
        math.inf, 1.0, 2 * math.pi * C / WP, 2 * math.sqrt(math.log(2)) / tau,
    )
    return CollinearFamily(src.replace(poling_period=solve_poling_period(src)))


def counterprop_family(betas=(0.0, 1.0, 3.0, 40.0), tau=TAU):
    return CounterpropFamily(PumpPulse(WP, tau, 1.0), TaylorDispersion(WP / 2, betas))


@pytest.fixture(scope="session")
def limiting_sources():
    """The two ideal limiting sources at σ = ω_p/10 on a 257-point grid."""
    return fig3_sources(WP, 0.1, 257)


@pytest.fixture(scope="session")
def fig3_full():
    """Default-resolution limiting sources (1001-point grid)."""
    return fig3_sources()


ACCEPTANCE_LINES = {}


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line per acceptance criterion, then assert it."""

    def report(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} ({detail})"
        ACCEPTANCE_LINES[number] = line
        print(line)
        assert ok, line

    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
