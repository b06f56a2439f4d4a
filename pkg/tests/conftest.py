from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from dersched import Scenario, parse_scenario


@pytest.fixture(scope="session")
def summer_scenario() -> Scenario:
    return parse_scenario("table1_summer")


@pytest.fixture(scope="session")
def winter_scenario() -> Scenario:
    return parse_scenario("table1_winter")
