import numpy as np
import pytest
from hypothesis import HealthCheck, settings

# every randomized test draws from this seed
SEED = 20240611

settings.register_profile(
    "repo",
    max_examples=40,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")


@pytest.fixture
def rng():
    return np.random.default_rng(SEED)
