import numpy as np
import pytest

from okreg import kernels


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=["sobolev01", "fermi-sobolev", "sobolev-r", "triangular:1.5"])
def builtin_kernel(request):
    return kernels.parse_kernel(request.param)
