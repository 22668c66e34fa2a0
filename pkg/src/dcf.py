"""Sampling density compensation weights."""
import numpy as np

from src.data import readout_spacing
from src.errors import DegenerateGeometryError, ParameterError
from src.nufft import Gridder, GriddingKernel

DENSITY_FLOOR = 1e-8
DCF_METHODS = ("gridded_ones", "ramp", "none")
FRAME_TOLERANCE = 1e-6


def _frame_grid_size(extent: float, kernel: GriddingKernel) -> int:
    """Smallest even period holding -extent..extent, rounding noise ignored."""
    n = max(int(np.ceil(2.0 * extent - FRAME_TOLERANCE)), 2 * kernel.n_taps)
    return n + (n % 2)


def dcf_gridded_ones(
    trajectory: np.ndarray, kernel: GriddingKernel, normalize: bool = True
) -> np.ndarray:
    """Density compensation from gridding a k-space of ones.

    Ones are gridded, the density map is degridded back at every sample and
    the weight is the reciprocal of that density. Densities are measured in
    units of the readout sample spacing on a periodic grid whose period is the
    sampled extent, wrapping at the edges like the reconstruction grid. The
    result does not depend on the trajectory scale.

    Args:
        trajectory: [axis, spoke, read].
        kernel: gridding kernel.
        normalize: divide by the largest weight.

    Returns:
        Weights [spoke, read] in [0, 1] when normalized.
    """
    trajectory = np.asarray(trajectory, dtype=np.float64)
    coords = trajectory[:2] / readout_spacing(trajectory)
    extent = float(np.abs(coords).max())
    gridder = Gridder(coords, kernel, _frame_grid_size(extent, kernel), support="square")

    density = gridder.interpolate(gridder.spread(np.ones(coords.shape[1:]))).real
    peak = density.max()
    if not peak > 0:
        raise DegenerateGeometryError("gridded density is zero everywhere")
    valid = density > DENSITY_FLOOR * peak
    weights = np.zeros_like(density)
    weights[valid] = 1.0 / density[valid]
    if normalize:
        weights /= weights.max()
    return weights


def dcf_ramp(trajectory: np.ndarray) -> np.ndarray:
    """Ramp weights |k| / max|k|; a DC sample takes the smallest positive weight of its spoke."""
    trajectory = np.asarray(trajectory, dtype=np.float64)
    radius = np.hypot(trajectory[0], trajectory[1])
    peak = radius.max()
    if not peak > 0:
        raise DegenerateGeometryError("trajectory is identically zero")
    weights = radius / peak

    weights = np.atleast_2d(weights)
    for spoke in weights:
        positive = spoke[spoke > 0]
        if positive.size:
            spoke[spoke == 0] = positive.min()
    return weights.reshape(radius.shape)


def compute_dcf(
    trajectory: np.ndarray, kernel: GriddingKernel, method: str = "gridded_ones"
) -> np.ndarray:
    """Dispatch on the configured DCF method."""
    if method == "gridded_ones":
        return dcf_gridded_ones(trajectory, kernel)
    if method == "ramp":
        return dcf_ramp(trajectory)
    if method == "none":
        return np.ones(np.shape(trajectory)[1:])
    raise ParameterError(f"unknown DCF method '{method}'")
