from pathlib import Path

import hypothesis
import numpy as np
import pytest

from singlink.braid import stable_diagram
from singlink.diskspec import load_config
from singlink.tracer import trace_link

np.seterr(all="warn")

hypothesis.settings.register_profile("fast", max_examples=5)
hypothesis.settings.register_profile("ci", max_examples=50, deadline=None)
hypothesis.settings.register_profile("debugger", report_multiple_bugs=False)

CORPUS = Path(__file__).resolve().parent.parent / "corpus"
EPSILON = 1e-2


@pytest.fixture(scope="session")
def corpus() -> Path:
    return CORPUS


@pytest.fixture(scope="session")
def configs():
    return {
        name: load_config(CORPUS / f"{name}.sing")
        for name in ("trefoil", "mirror", "hopf", "iterated", "regular")
    }


@pytest.fixture(scope="session")
def loops(configs):
    """One traced loop per single-disk corpus file, at the default epsilon."""
    return {
        name: trace_link(configs[name].disks[0], EPSILON)
        for name in ("trefoil", "mirror", "iterated", "regular")
    }


@pytest.fixture(scope="session")
def diagrams(configs):
    return {name: stable_diagram(list(config), EPSILON) for name, config in configs.items()}
