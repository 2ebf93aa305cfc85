import json
from pathlib import Path

import pytest

from hollingbif.continuation import reproduce_two_cycle_scenario
from hollingbif.fixtures import SCENARIO_BASE

FROZEN = json.loads((Path(__file__).parent / "oracles" / "frozen.json").read_text())


@pytest.fixture(scope="session")
def frozen():
    return FROZEN


@pytest.fixture(scope="session")
def scenario():
    return reproduce_two_cycle_scenario(SCENARIO_BASE)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
