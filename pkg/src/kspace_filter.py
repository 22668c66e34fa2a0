"""Post-reconstruction k-space filters."""
from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional

import numpy as np

from src.data import GridGeometry
from src.errors import ParameterError, ShapeError
from src.nufft import fft_centered, ifft_centered

FILTER_KINDS = ("arctan", "hard_circle", "none")
CUTOFF_UNITS = ("cycles", "normalized")


@dataclass(frozen=True)
class FilterSpec:
    """Filter kind with cutoff k_c and arctan steepness beta.

    k_c is given in ``unit``: "cycles" counts k-space cells of the n x n
    image, "normalized" is a fraction of the matrix size n, so 0.5 reaches
    the edge of the inscribed disk whatever the data radius. None selects
    the radius of the acquired data.
    """

    kind: str = "hard_circle"
    k_c: Optional[float] = None
    beta: float = 100.0
    unit: str = "cycles"

    def __post_init__(self) -> None:
        if self.kind not in FILTER_KINDS:
            raise ParameterError(f"unknown filter kind '{self.kind}'")
        if self.unit not in CUTOFF_UNITS:
            raise ParameterError(f"unknown cutoff unit '{self.unit}'")
        if self.k_c is not None and not self.k_c > 0:
            raise ParameterError(f"filter cutoff must be positive, got {self.k_c}")
        if not self.beta > 0:
            raise ParameterError(f"filter beta must be positive, got {self.beta}")

    def cutoff(self, geometry: GridGeometry) -> float:
        """Cutoff radius in k-space cells of the n x n image."""
        if self.k_c is None:
            return geometry.support_radius
        if self.unit == "normalized":
            return self.k_c * geometry.matrix_size
        return float(self.k_c)

    def record(self, geometry: GridGeometry) -> Dict[str, Any]:
        out = asdict(self)
        out["cutoff_cycles"] = self.cutoff(geometry)
        return out


def kspace_radius(n: int) -> np.ndarray:
    """|k| in cells for a centered n x n k-space."""
    k = np.arange(n) - n // 2
    return np.hypot(k[:, None], k[None, :])


def filter_weights(spec: FilterSpec, geometry: GridGeometry) -> np.ndarray:
    """Real weights [n, n] for a centered k-space of the reconstructed image."""
    radius = kspace_radius(geometry.matrix_size)
    if spec.kind == "none":
        return np.ones_like(radius)
    k_c = spec.cutoff(geometry)
    if spec.kind == "hard_circle":
        return (radius <= k_c).astype(np.float64)
    return 0.5 + np.arctan(spec.beta * (k_c - radius) / k_c) / np.pi


def filter_kspace(image: np.ndarray, spec: FilterSpec, geometry: GridGeometry) -> np.ndarray:
    """Centered k-space of the image multiplied by the filter weights."""
    n = geometry.matrix_size
    if image.shape[-2:] != (n, n):
        raise ShapeError(f"image {image.shape} does not match matrix size {n}")
    return fft_centered(image) * filter_weights(spec, geometry)


def apply_filter(image: np.ndarray, spec: FilterSpec, geometry: GridGeometry) -> np.ndarray:
    """Filter an image [..., n, n] in k-space."""
    if spec.kind == "none":
        return np.array(image, copy=True)
    return ifft_centered(filter_kspace(image, spec, geometry))
