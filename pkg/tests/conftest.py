import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from qabench.topology import build_chimera

# numba-backed code paths have a large first-call cost; wall-clock deadlines
# would flake on them
settings.register_profile(
    "qabench",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("qabench")


@pytest.fixture(scope="session")
def cell_graph():
    return build_chimera(1)


@pytest.fixture(scope="session")
def c2_graph():
    return build_chimera(2)


@pytest.fixture
def rng():
    return np.random.default_rng(0)
