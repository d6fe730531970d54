import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from spslab import Couplings, RadialField, RadialGrid, gaussian, solve_ground_state

settings.register_profile("spslab", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("spslab")

A_G = 1.5
B_G = math.sqrt(2 / math.pi)
C_G = -(2 * math.pi) ** -1.5


@pytest.fixture(scope="session")
def gauss():
    """Unit-mass Gaussian pi^{-3/4} exp(-r^2/2) at p = 4."""
    g = gaussian(RadialGrid(4096, 16.0))
    return RadialField(g.grid, g.values, 4.0)


@pytest.fixture(scope="session")
def gs05():
    return solve_ground_state(4.0, 0.5, Couplings())
