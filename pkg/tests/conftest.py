import numpy as np
import pytest

from capdrop.geometry import Sphere


@pytest.fixture
def rng():
    return np.random.default_rng(20260816)


@pytest.fixture
def unit_sphere():
    return Sphere((0.0, 0.0, 0.0), 1.0)
