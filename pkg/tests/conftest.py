import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from saddlescope import scenarios  # noqa: E402

_RUNS = {}


def cached_run(name):
    """Default-initial run of a catalog scenario, computed once per session."""
    if name not in _RUNS:
        _RUNS[name] = scenarios.run_scenario(name, certificates=False)
    return _RUNS[name]


@pytest.fixture(scope="session")
def scenario_run():
    return cached_run


ACCEPTANCE = {}


def record_acceptance(number, ok, detail):
    ACCEPTANCE[number] = (bool(ok), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
