from pathlib import Path

import pytest

from mroot import _config

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(autouse=True, scope="session")
def _checks_on():
    _config.set_checks(True)
    yield


@pytest.fixture
def fixtures():
    return FIXTURES


_ACCEPTANCE = []


@pytest.fixture
def report():
    """Record one acceptance line; all lines are printed again in the terminal summary."""
    def add(num, ok, detail):
        line = f"criterion {num}: {'PASS' if ok else 'FAIL'} | {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        return ok
    return add


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
