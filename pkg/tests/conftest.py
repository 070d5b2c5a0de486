from pathlib import Path

import pytest

from evsys.parser import load_system, parse_system

SYSTEMS = Path(__file__).resolve().parent.parent / "systems"

# filled by test_acceptance, printed at the end of the run
ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def systems_dir() -> Path:
    return SYSTEMS


@pytest.fixture
def load():
    return lambda name: load_system(SYSTEMS / name)


@pytest.fixture
def parse():
    return parse_system


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
