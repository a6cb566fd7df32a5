import numpy as np
import pytest

from suprelax._kernels import warmup


@pytest.fixture(scope="session", autouse=True)
def _compile_kernels():
    # pay any jit compilation cost before timed assertions run
    warmup()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
