import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cnlm import ConverterConfig, ModulatorState, load_scenario  # noqa: E402

PAPER_VOLTAGES = (37.0, 55.0, 83.0, 125.0)

_ACCEPTANCE_LINES = []


def record_criterion(name, passed, detail=""):
    _ACCEPTANCE_LINES.append(f"{'PASS' if passed else 'FAIL'}  {name}" + (f"  [{detail}]" if detail else ""))


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def default_cfg():
    return ConverterConfig(PAPER_VOLTAGES, dead_time=100e-9, control_step=200e-9)


@pytest.fixture
def fresh_state():
    return ModulatorState.initial(4)


@pytest.fixture(scope="session")
def default_scenario():
    return load_scenario("nlm_default")
