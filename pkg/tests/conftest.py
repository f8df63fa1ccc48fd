import math

import pytest

from delaybvp import spectral
from delaybvp.problem import ProblemSpec

PI_HALF = math.pi / 2


@pytest.fixture(scope="session")
def null_spec():
    return ProblemSpec.from_strings("0", "0", "0", "0", PI_HALF, PI_HALF, 1.0)


@pytest.fixture(scope="session")
def constq_spec():
    return ProblemSpec.from_strings("1", "1", "0", "0", PI_HALF, PI_HALF, 1.0)


@pytest.fixture(scope="session")
def delayed_spec():
    return ProblemSpec.from_strings(
        "sin(x)", "cos(x)",
        "0.5*x*(pi/2 - x)", "(x - pi/2)*(pi - x)*0.25",
        PI_HALF, PI_HALF, 1.0)


@pytest.fixture(scope="session")
def constq_pairs(constq_spec):
    """Localized eigenpairs n = 5..50 for the constant-q problem."""
    return spectral.localize_range(constq_spec, range(5, 51))


@pytest.fixture(scope="session")
def delayed_pairs(delayed_spec):
    """Localized eigenpairs n = 5..50 for the delayed problem."""
    return spectral.localize_range(delayed_spec, range(5, 51))
