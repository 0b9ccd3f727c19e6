import pytest

from exosc.models import CorbeillerParams, HesterParams

ACCEPTANCE_LINES: list = []


@pytest.fixture
def hp():
    return HesterParams(alpha=0.5, mu=0.4, kappa=0.2, gamma=0.3)


@pytest.fixture
def cp():
    return CorbeillerParams(a=1.0, b=0.25)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)
