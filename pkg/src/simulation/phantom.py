"""Ellipse phantoms and synthetic coil sensitivities."""
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from src.coils import SensitivitySet
from src.errors import ParameterError

# intensity, semi-axes (a, b), center (x0, y0), rotation in degrees
MODIFIED_SHEPP_LOGAN = (
    (1.0, (0.69, 0.92), (0.0, 0.0), 0.0),
    (-0.8, (0.6624, 0.874), (0.0, -0.0184), 0.0),
    (-0.2, (0.11, 0.31), (0.22, 0.0), -18.0),
    (-0.2, (0.16, 0.41), (-0.22, 0.0), 18.0),
    (0.1, (0.21, 0.25), (0.0, 0.35), 0.0),
    (0.1, (0.046, 0.046), (0.0, 0.1), 0.0),
    (0.1, (0.046, 0.046), (0.0, -0.1), 0.0),
    (0.1, (0.046, 0.023), (-0.08, -0.605), 0.0),
    (0.1, (0.023, 0.023), (0.0, -0.606), 0.0),
    (0.1, (0.023, 0.046), (0.06, -0.605), 0.0),
)


@dataclass(frozen=True)
class Ellipse:
    """Additive ellipse in normalized coordinates, the FOV spans [-1, 1]."""

    intensity: float
    axes: Tuple[float, float]
    center: Tuple[float, float] = (0.0, 0.0)
    angle: float = 0.0

    def inside(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        phi = np.deg2rad(self.angle)
        dx, dy = x - self.center[0], y - self.center[1]
        u = dx * np.cos(phi) + dy * np.sin(phi)
        v = dy * np.cos(phi) - dx * np.sin(phi)
        return (u / self.axes[0]) ** 2 + (v / self.axes[1]) ** 2 <= 1.0


@dataclass(frozen=True)
class PhantomSpec:
    matrix_size: int
    ellipses: List[Ellipse] = field(default_factory=list)


def shepp_logan_spec(matrix_size: int = 64) -> PhantomSpec:
    """Modified Shepp-Logan head phantom; the outer shell holds the maximum 1.0."""
    return PhantomSpec(
        matrix_size=matrix_size,
        ellipses=[Ellipse(a, axes, center, angle) for a, axes, center, angle in MODIFIED_SHEPP_LOGAN],
    )


def normalized_grid(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Pixel-center coordinates (x right, y up) in [-1, 1]."""
    axis = (np.arange(n) - (n - 1) / 2.0) / (n / 2.0)
    x = np.broadcast_to(axis[None, :], (n, n))
    y = np.broadcast_to(-axis[:, None], (n, n))
    return x, y


def make_phantom(spec: PhantomSpec) -> np.ndarray:
    """Rasterize the piecewise-constant ellipse sum as a complex image."""
    x, y = normalized_grid(spec.matrix_size)
    image = np.zeros((spec.matrix_size,) * 2)
    for ellipse in spec.ellipses:
        image[ellipse.inside(x, y)] += ellipse.intensity
    return image.astype(np.complex128)


def make_coil_maps(
    n: int,
    n_coils: int,
    ring_radius: float = 1.2,
    width: float = 0.9,
    phase_slope: float = 0.5,
) -> SensitivitySet:
    """Gaussian-lobe coils on a ring around the FOV with linear phase.

    Args:
        n: matrix size.
        n_coils: number of coils (>= 1).
        ring_radius: distance of the coil centers from the FOV center.
        width: Gaussian standard deviation, normalized units.
        phase_slope: phase ramp in half-turns across the FOV.

    Returns:
        SensitivitySet whose intensity is positive over the whole FOV.
    """
    if n_coils < 1:
        raise ParameterError(f"n_coils must be >= 1, got {n_coils}")
    x, y = normalized_grid(n)
    maps = np.empty((n_coils, n, n), dtype=np.complex128)
    for c in range(n_coils):
        theta = 2.0 * np.pi * c / n_coils
        cx, cy = ring_radius * np.cos(theta), ring_radius * np.sin(theta)
        magnitude = np.exp(-((x - cx) ** 2 + (y - cy) ** 2) / (2.0 * width ** 2))
        phase = np.pi * phase_slope * (x * np.cos(theta) + y * np.sin(theta))
        maps[c] = magnitude * np.exp(1j * phase)
    return SensitivitySet.from_maps(maps, mask=np.ones((n, n), dtype=bool))
