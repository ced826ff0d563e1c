import pytest
from hypothesis import settings

from lvhopf import ModelParams, compute_equilibrium, linear_coeffs

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def params():
    return ModelParams(4.0, 0.01)


@pytest.fixture(scope="session")
def eq(params):
    return compute_equilibrium(params)


@pytest.fixture(scope="session")
def coeffs(params, eq):
    return linear_coeffs(params, eq)
