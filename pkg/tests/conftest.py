import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=25,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture(scope="session")
def real_segments():
    """Aligned temperature windows from the bundled extract (motes 2 and 3)."""
    from ehdcs import dataio
    traces = dataio.load_traces(dataio.bundled_extract_path(), (2, 3))
    segs = dataio.segment_aligned(traces, 397)
    return np.array([s.samples for s in segs])
