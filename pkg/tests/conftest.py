import pytest

from urtlab import build_kernel


@pytest.fixture(scope="session")
def kernel_d4():
    return build_kernel(4, 64)


@pytest.fixture(scope="session")
def kernel_d3():
    return build_kernel(3, 64)


@pytest.fixture(scope="session")
def kernel_d4_long():
    return build_kernel(4, 4096)
