"""Shared simulated acquisitions for the test suite."""
import numpy as np
import pytest
from scipy.ndimage import maximum_filter, minimum_filter

from src.simulation import (
    make_coil_maps,
    make_phantom,
    make_radial_trajectory,
    shepp_logan_spec,
    simulate_acquisition,
)


def simulate(n=64, n_coils=8, n_spokes=101, n_read=128, **kwargs):
    phantom = make_phantom(shepp_logan_spec(n))
    maps = make_coil_maps(n, n_coils)
    trajectory = make_radial_trajectory(n_spokes, n_read, 2 * n)
    return simulate_acquisition(phantom, maps, trajectory, 2 * n, **kwargs)


def interior_mask(phantom: np.ndarray, size: int = 7) -> np.ndarray:
    """Pixels of the object whose size x size neighbourhood is constant."""
    magnitude = np.abs(phantom)
    flat = maximum_filter(magnitude, size=size) == minimum_filter(magnitude, size=size)
    return flat & (magnitude != 0)


@pytest.fixture(scope="session")
def phantom_acquisition():
    """Noiseless 8-coil 64x64 phantom, 101 radial spokes."""
    return simulate()


@pytest.fixture(scope="session")
def small_acquisition():
    """Noiseless 4-coil 32x32 phantom, 51 radial spokes."""
    return simulate(n=32, n_coils=4, n_spokes=51, n_read=64)
