"""Kaiser-Bessel gridding kernel and its image-space apodization."""
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import i0e

from src.errors import ParameterError

LOOKUP_MODES = ("linear", "nearest")


def beatty_beta(width: float, oversampling_ratio: float) -> float:
    """Kaiser-Bessel shape parameter minimizing aliasing for a given width."""
    arg = (width / oversampling_ratio) ** 2 * (oversampling_ratio - 0.5) ** 2 - 0.8
    if arg <= 0:
        raise ParameterError(
            f"no valid Kaiser-Bessel shape for width {width} and ratio {oversampling_ratio}"
        )
    return float(np.pi * np.sqrt(arg))


@dataclass(frozen=True)
class GriddingKernel:
    """Tabulated separable Kaiser-Bessel window.

    Attributes:
        width: kernel support in grid cells.
        table: kernel values at uniformly spaced radii 0 .. width / 2, table[0] = 1.
        shape_beta: Kaiser-Bessel shape parameter.
        lookup_mode: "linear" or "nearest" table interpolation.
    """

    width: float
    table: np.ndarray
    shape_beta: float
    lookup_mode: str = "linear"

    @property
    def radius(self) -> float:
        return self.width / 2.0

    @property
    def n_taps(self) -> int:
        """Grid cells a sample can touch per axis."""
        return int(np.ceil(self.width)) + 1

    def __call__(self, distance: np.ndarray) -> np.ndarray:
        """Look up the 1D kernel at the given signed distances (grid cells)."""
        distance = np.abs(np.asarray(distance, dtype=np.float64))
        step = self.radius / (self.table.size - 1)
        position = distance / step
        inside = distance <= self.radius
        if self.lookup_mode == "nearest":
            index = np.minimum(np.rint(position).astype(np.intp), self.table.size - 1)
            values = self.table[index]
        else:
            lower = np.minimum(np.floor(position).astype(np.intp), self.table.size - 2)
            frac = position - lower
            values = self.table[lower] * (1.0 - frac) + self.table[lower + 1] * frac
        return np.where(inside, values, 0.0)


def build_kernel(
    width: float = 5,
    n_table_points: int = 10000,
    oversampling_ratio: float = 2.0,
    lookup_mode: str = "linear",
    beta: Optional[float] = None,
) -> GriddingKernel:
    """Precompute a Kaiser-Bessel lookup table.

    Args:
        width: kernel width in grid cells (>= 2).
        n_table_points: table length (>= 100).
        oversampling_ratio: grid oversampling, must exceed 1.
        lookup_mode: "linear" or "nearest".
        beta: shape parameter; derived from width and ratio if None.

    Returns:
        GriddingKernel with a non-increasing table normalized to 1 at the center.
    """
    if width < 2:
        raise ParameterError(f"kernel width must be >= 2, got {width}")
    if n_table_points < 100:
        raise ParameterError(f"kernel table needs >= 100 points, got {n_table_points}")
    if oversampling_ratio <= 1:
        raise ParameterError(f"oversampling ratio must exceed 1, got {oversampling_ratio}")
    if lookup_mode not in LOOKUP_MODES:
        raise ParameterError(f"unknown kernel lookup mode '{lookup_mode}'")
    if beta is None:
        beta = beatty_beta(width, oversampling_ratio)
    elif beta <= 0:
        raise ParameterError(f"kernel beta must be positive, got {beta}")

    u = np.linspace(0.0, width / 2.0, int(n_table_points))
    s = np.sqrt(np.clip(1.0 - (2.0 * u / width) ** 2, 0.0, None))
    # I0(beta s) / I0(beta) via the scaled Bessel function
    table = i0e(beta * s) / i0e(beta) * np.exp(beta * (s - 1.0))
    table.setflags(write=False)
    return GriddingKernel(
        width=float(width), table=table, shape_beta=float(beta), lookup_mode=lookup_mode
    )
