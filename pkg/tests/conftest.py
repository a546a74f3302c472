import numpy as np
import pytest
from hypothesis import HealthCheck, assume, settings, strategies as st

from decomp_mc import zoo
from decomp_mc.errors import InvalidPartition

settings.register_profile(
    "default", max_examples=40, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@st.composite
def chains(draw, min_n=2, max_n=12):
    n = draw(st.integers(min_n, max_n))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    return zoo.random_reversible(n, rng, density=draw(st.floats(0.2, 1.0)))


@st.composite
def partitioned(draw, min_n=4, max_n=14, max_m=4):
    """Random chain with a valid random partition into 2..max_m blocks."""
    n = draw(st.integers(min_n, max_n))
    m = draw(st.integers(2, min(max_m, n // 2)))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    chain = zoo.random_reversible(n, rng, density=0.7)
    try:
        part = zoo.random_partition(chain, m, rng, max_tries=200)
    except InvalidPartition:
        assume(False)
    return chain, part, rng


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
