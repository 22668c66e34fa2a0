"""Convolution gridding onto the oversampled Cartesian grid.

The interpolation weights of a trajectory are assembled once into a sparse
matrix G of shape (n_samples, grid_size**2). Degridding is ``G @ grid`` and
gridding is ``G.T @ samples``, so the pair is adjoint by construction.
"""
import warnings
from typing import Optional

import numpy as np
from scipy import sparse

from src.data import GridGeometry
from src.errors import ParameterError, ShapeError
from src.nufft.kernel import GriddingKernel

DROP_WARNING_FRACTION = 0.01
SUPPORTS = ("disk", "square")


class Gridder:
    """Sparse interpolation matrix for one trajectory on one grid."""

    def __init__(
        self,
        trajectory: np.ndarray,
        kernel: GriddingKernel,
        grid_size: int,
        support: str = "disk",
    ) -> None:
        """Initialize Gridder.

        Args:
            trajectory: [axis, ...] coordinates in grid cells, axis 0 = x, 1 = y.
            kernel: gridding kernel.
            grid_size: side length of the square grid.
            support: samples kept, "disk" of radius grid_size / 2 or the whole
                "square" period.
        """
        if support not in SUPPORTS:
            raise ParameterError(f"unknown gridding support '{support}'")
        trajectory = np.asarray(trajectory, dtype=np.float64)
        self.sample_shape = trajectory.shape[1:]
        self.grid_size = int(grid_size)
        self.kernel = kernel

        kx = trajectory[0].ravel()
        ky = trajectory[1].ravel()
        n_samples = kx.size
        half = self.grid_size / 2.0

        # a sample outside the support would alias; drop it instead
        if support == "disk":
            keep = np.hypot(kx, ky) <= half
        else:
            keep = np.maximum(np.abs(kx), np.abs(ky)) <= half
        self.n_samples = n_samples
        self.n_dropped = int(n_samples - np.count_nonzero(keep))

        taps = np.arange(kernel.n_taps)
        gx, gy = kx + half, ky + half
        ix = np.ceil(gx - kernel.radius).astype(np.intp)[:, None] + taps
        iy = np.ceil(gy - kernel.radius).astype(np.intp)[:, None] + taps
        wx = kernel(ix - gx[:, None])
        wy = kernel(iy - gy[:, None])
        wx[~keep] = 0.0
        # the grid is periodic: taps past an edge fold onto the opposite side
        ix = np.mod(ix, self.grid_size)
        iy = np.mod(iy, self.grid_size)

        values = wy[:, :, None] * wx[:, None, :]
        cols = iy[:, :, None] * self.grid_size + ix[:, None, :]
        rows = np.broadcast_to(np.arange(n_samples)[:, None, None], values.shape)
        nonzero = values != 0.0
        self.matrix = sparse.csr_matrix(
            (values[nonzero], (rows[nonzero], cols[nonzero])),
            shape=(n_samples, self.grid_size ** 2),
        )
        self.matrix_h = self.matrix.T.tocsr()

        if n_samples and self.n_dropped > DROP_WARNING_FRACTION * n_samples:
            warnings.warn(
                f"{self.n_dropped} of {n_samples} samples lie outside the "
                f"{self.grid_size}x{self.grid_size} grid and were dropped",
                UserWarning,
            )

    @property
    def dropped_fraction(self) -> float:
        return self.n_dropped / self.n_samples if self.n_samples else 0.0

    def _flatten_samples(self, samples: np.ndarray) -> np.ndarray:
        samples = np.asarray(samples)
        n_sample_dims = len(self.sample_shape)
        if samples.shape[samples.ndim - n_sample_dims:] != self.sample_shape:
            raise ShapeError(
                f"samples {samples.shape} do not end in trajectory shape {self.sample_shape}"
            )
        return samples.reshape(-1, self.n_samples)

    def spread(self, samples: np.ndarray) -> np.ndarray:
        """Grid samples [..., *sample_shape] onto [..., grid, grid]."""
        lead = np.shape(samples)[: np.ndim(samples) - len(self.sample_shape)]
        flat = self._flatten_samples(samples)
        grid = (self.matrix_h @ flat.T).T
        return grid.reshape(*lead, self.grid_size, self.grid_size)

    def interpolate(self, grid: np.ndarray) -> np.ndarray:
        """Degrid [..., grid, grid] onto [..., *sample_shape]."""
        grid = np.asarray(grid)
        if grid.shape[-2:] != (self.grid_size, self.grid_size):
            raise ShapeError(
                f"grid {grid.shape} does not match grid size {self.grid_size}"
            )
        lead = grid.shape[:-2]
        flat = grid.reshape(-1, self.grid_size ** 2)
        samples = (self.matrix @ flat.T).T
        return samples.reshape(*lead, *self.sample_shape)


def grid_adjoint(
    samples: np.ndarray,
    trajectory: np.ndarray,
    kernel: GriddingKernel,
    geometry: GridGeometry,
    weights: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Convolve (weighted) samples onto the oversampled grid.

    Args:
        samples: [..., spoke, read] complex samples.
        trajectory: [axis, spoke, read] in grid cells.
        kernel: gridding kernel.
        geometry: target grid.
        weights: optional per-sample real weights [spoke, read].

    Returns:
        Cartesian k-space [..., grid_size, grid_size].
    """
    gridder = Gridder(trajectory, kernel, geometry.grid_size)
    if weights is not None:
        samples = samples * weights
    return gridder.spread(samples)


def degrid_forward(
    kspace: np.ndarray,
    trajectory: np.ndarray,
    kernel: GriddingKernel,
    geometry: GridGeometry,
    weights: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Interpolate Cartesian k-space at the trajectory points; adjoint of grid_adjoint."""
    gridder = Gridder(trajectory, kernel, geometry.grid_size)
    samples = gridder.interpolate(kspace)
    if weights is not None:
        samples = samples * weights
    return samples
