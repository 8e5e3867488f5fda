import pytest

from bitextkit import kernels


@pytest.fixture(params=kernels.available_backends())
def kernel_backend(request):
    """Run the test once per available kernel backend."""
    previous = kernels.backend_name()
    kernels.set_backend(request.param)
    yield request.param
    kernels.set_backend(previous)
