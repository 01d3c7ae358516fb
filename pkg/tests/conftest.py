import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


@st.composite
def hpoints(draw, n=None, lo=1, hi=5):
    """Random nonzero homogeneous vectors in C^(n+1)."""
    n = draw(st.integers(lo, hi)) if n is None else n
    re = draw(st.lists(finite, min_size=n + 1, max_size=n + 1))
    im = draw(st.lists(finite, min_size=n + 1, max_size=n + 1))
    v = np.array(re) + 1j * np.array(im)
    if np.linalg.norm(v) < 1e-6:
        v[0] += 1.0
    return v


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
