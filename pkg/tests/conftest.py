from importlib import resources
from pathlib import Path

import pytest

from scenrun.lang import parse_source
from scenrun.model import build_model

FIXTURES = Path(__file__).parent / "fixtures"
DATA = Path(__file__).parent / "data"
SCENARIOS = Path(str(resources.files("scenrun") / "scenarios"))


def scenario_path(name: str) -> Path:
    return SCENARIOS / f"{name}.osc"


def scenario_source(name: str) -> str:
    return scenario_path(name).read_text(encoding="utf-8")


def model_of(source: str, index: int = 0):
    return build_model(parse_source(source, "<test>"))[index]


@pytest.fixture
def nav2_source():
    return scenario_source("example_nav2")


@pytest.fixture
def fault_source():
    return scenario_source("example_fault_injection")
