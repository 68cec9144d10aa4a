import numpy as np
import pytest

from crowsim.model import ModelParams, TimeGrid, grid_from_xi0_units
from crowsim.spectral import QuadratureSpec


def make_params(**overrides) -> ModelParams:
    """Paper parameters with keyword overrides."""
    return ModelParams(**overrides)


@pytest.fixture(scope="session")
def quad256():
    return QuadratureSpec(nodes=256)


@pytest.fixture(scope="session")
def short_grid():
    """10/xi0 horizon, dt = 0.0125/xi0 — fast but resolves the dynamics."""
    return grid_from_xi0_units(10.0, 800, 1.24)


@pytest.fixture(scope="session")
def paper_grid():
    """The production grid: t_max = 60/xi0, dt = 0.01/xi0."""
    return grid_from_xi0_units(60.0, 6000, 1.24)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
