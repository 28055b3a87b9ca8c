import numpy as np
import pytest

from ginprod.process import GinibreSource, ProcessSpec, TruncatedUnitary


@pytest.fixture(scope="session")
def specs22():
    """The n=2, m=2 instance of each family used across the suite."""
    return {
        "ginibre": ProcessSpec.build(2, 2, [0, 1]),
        "truncated": ProcessSpec.build(2, 2, [1, 0], TruncatedUnitary(7)),
        "source": ProcessSpec.build(2, 2, [0, 0], GinibreSource((0.5, 1.5))),
    }


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
