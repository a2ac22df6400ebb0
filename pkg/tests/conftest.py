import pytest

from graphlap import kernels


@pytest.fixture(autouse=True, scope="session")
def _fresh_moment_cache():
    kernels.MOMENT_CACHE.clear()
    yield
