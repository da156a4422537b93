import pytest
from hypothesis import HealthCheck, settings

from kothe_hankel.sequences import ExponentSequence
from kothe_hankel.spaces import KotheMatrix

settings.register_profile("repo", derandomize=True, deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")

LIN = ExponentSequence.linear()
LOG = ExponentSequence.log()


@pytest.fixture
def linf():
    return KotheMatrix.power_series_infinite(LIN)


@pytest.fixture
def l1():
    return KotheMatrix.power_series_finite(LIN)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        title, outcomes = RESULTS[number]
        failed = [name for name, ok in outcomes if not ok]
        status = "FAIL" if failed else "PASS"
        line = f"criterion {number:>2}: {status}  {title}"
        if failed:
            line += f"  [failing: {', '.join(failed)}]"
        terminalreporter.write_line(line)
