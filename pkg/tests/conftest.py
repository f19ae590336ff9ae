import os
from pathlib import Path

import hypothesis
import pytest

from manetga.gaopt import Network
from manetga.netmodel import Commodity

hypothesis.settings.register_profile("ci", max_examples=60, deadline=None)
hypothesis.settings.register_profile("thorough", max_examples=500, deadline=None)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "ci"))

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


@pytest.fixture
def scenario_path():
    return lambda name: str(SCENARIOS / f"{name}.scn")


@pytest.fixture
def square():
    """Links (1,2),(2,4),(1,3),(3,4), every capacity 10."""
    return Network.from_links({(1, 2): 10, (2, 4): 10, (1, 3): 10, (3, 4): 10})


@pytest.fixture
def square_demands():
    return [Commodity(1, 1, 4, 6), Commodity(2, 1, 4, 6)]
