"""Core value types: k-space datasets and grid geometry.

Arrays use the canonical order [coil, spoke, readout] for samples and
[axis, spoke, readout] for trajectories, with axis order (x, y, z). Trajectory
values are in oversampled-grid cells: a value u lands on grid index
u + grid_size / 2.
"""
import math
from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

import numpy as np

from src.errors import DegenerateGeometryError, ParameterError, RangeError

DEFAULT_OVERSAMPLING = 2.0
UNDERSAMPLING_SCHEMES = ("skip", "first")


@dataclass(frozen=True)
class KSpaceDataset:
    """Multi-coil non-Cartesian k-space samples with side data."""

    samples: np.ndarray
    trajectory: np.ndarray
    sensitivities: Optional[np.ndarray] = None
    noise_covariance: Optional[np.ndarray] = None
    noise_scan: Optional[np.ndarray] = None
    whitened: bool = False
    oversampling_ratio: Optional[float] = None

    @property
    def n_coils(self) -> int:
        return self.samples.shape[0]

    @property
    def n_spokes(self) -> int:
        return self.samples.shape[1]

    @property
    def n_read(self) -> int:
        return self.samples.shape[2]


@dataclass(frozen=True)
class GridGeometry:
    """Target matrix and oversampled gridding matrix.

    Attributes:
        matrix_size: side length n of the reconstructed image.
        grid_size: side length n_os of the oversampled grid (even).
        oversampling_ratio: n_os / n.
        delta_k: grid spacing in cycles per pixel, 1 / n_os.
        k_max: largest sample radius in grid cells.
    """

    matrix_size: int
    grid_size: int
    oversampling_ratio: float
    delta_k: float
    k_max: float

    @property
    def support_radius(self) -> float:
        """Radius of the acquired data in cycles of the target FOV."""
        return self.k_max / self.oversampling_ratio


@dataclass
class ValidationReport:
    """Findings of ``validate_dataset``; empty means valid."""

    findings: List[str] = field(default_factory=list)

    @property
    def is_valid(self) -> bool:
        return not self.findings

    def __bool__(self) -> bool:
        return self.is_valid


def _even_ceil(value: float) -> int:
    n = int(math.ceil(value - 1e-9))
    return n + (n % 2)


def _even_round(value: float) -> int:
    n = int(round(value))
    return n + (n % 2)


def validate_dataset(raw: KSpaceDataset) -> ValidationReport:
    """Check every dataset invariant and collect the violations."""
    report = ValidationReport()
    samples, traj = np.asarray(raw.samples), np.asarray(raw.trajectory)

    if samples.ndim != 3:
        report.findings.append(f"samples must be [coil, spoke, read], got {samples.shape}")
    elif samples.shape[0] < 1:
        report.findings.append("empty coil dimension")
    if not np.iscomplexobj(samples):
        report.findings.append(f"samples must be complex, got {samples.dtype}")
    if traj.ndim != 3 or traj.shape[0] != 3:
        report.findings.append(f"trajectory must be [3, spoke, read], got {traj.shape}")
    elif samples.ndim == 3 and samples.shape[1:] != traj.shape[1:]:
        report.findings.append(
            f"shape mismatch: samples {samples.shape} vs trajectory {traj.shape}"
        )
    if traj.ndim == 3 and traj.shape[0] == 3 and np.any(traj[2] != 0):
        report.findings.append("non-planar trajectory: z-axis is not zero")
    if samples.size and not np.all(np.isfinite(samples)):
        report.findings.append("samples contain non-finite values")
    if traj.size and not np.all(np.isfinite(traj)):
        report.findings.append("trajectory contains non-finite values")

    n_coils = samples.shape[0] if samples.ndim == 3 else None
    if raw.sensitivities is not None:
        sens = np.asarray(raw.sensitivities)
        if sens.ndim != 3 or (n_coils is not None and sens.shape[0] != n_coils):
            report.findings.append(
                f"sensitivities {sens.shape} do not match {n_coils} coils"
            )
    if raw.noise_covariance is not None:
        cov = np.asarray(raw.noise_covariance)
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1] or cov.shape[0] != n_coils:
            report.findings.append(
                f"noise covariance {cov.shape} does not match {n_coils} coils"
            )
        else:
            if not np.allclose(cov, cov.conj().T, rtol=1e-10, atol=1e-12):
                report.findings.append("noise covariance is not Hermitian")
            diag = np.diag(cov)
            if np.any(np.abs(diag.imag) > 1e-12 * np.abs(diag.real).max()) or np.any(
                diag.real <= 0
            ):
                report.findings.append("noise covariance diagonal is not positive real")
    if raw.noise_scan is not None:
        noise = np.asarray(raw.noise_scan)
        if noise.ndim != 2 or noise.shape[0] != n_coils:
            report.findings.append(f"noise scan {noise.shape} does not match {n_coils} coils")
    return report


def readout_spacing(trajectory: np.ndarray) -> float:
    """Median distance between neighbouring readout samples."""
    steps = np.linalg.norm(np.diff(trajectory[:2], axis=-1), axis=0)
    steps = steps[steps > 0]
    if steps.size == 0:
        raise DegenerateGeometryError("trajectory has no readout extent")
    return float(np.median(steps))


def rescale_trajectory(
    trajectory: np.ndarray, oversampling_ratio: Optional[float] = None
) -> Tuple[np.ndarray, float]:
    """Convert a FOV-unit trajectory into oversampled-grid units.

    Measured brain and heart files store k in cycles per target FOV (entries up
    to N/2) with a readout step of 1/FOV_os. Multiplying by the oversampling
    ratio puts one readout step on one grid cell. The same factor is applied to every axis.

    Args:
        trajectory: [3, spoke, read] in FOV units.
        oversampling_ratio: known ratio; inferred as 1 / readout step if None.

    Returns:
        The rescaled trajectory and the ratio used.
    """
    if oversampling_ratio is None:
        oversampling_ratio = 1.0 / readout_spacing(trajectory)
    if oversampling_ratio <= 0:
        raise ParameterError(f"oversampling ratio must be positive, got {oversampling_ratio}")
    return np.asarray(trajectory, dtype=np.float64) * oversampling_ratio, float(
        oversampling_ratio
    )


def derive_geometry(
    trajectory: np.ndarray, oversampling_ratio: Optional[float] = None
) -> GridGeometry:
    """Derive grid and matrix size from a grid-unit trajectory.

    Args:
        trajectory: [3, spoke, read] (or [2, ...]) in grid cells.
        oversampling_ratio: ratio of grid to matrix size, default 2.

    Returns:
        GridGeometry with an even grid size covering the largest radius.
    """
    trajectory = np.asarray(trajectory, dtype=np.float64)
    k_max = float(np.sqrt(trajectory[0] ** 2 + trajectory[1] ** 2).max(initial=0.0))
    if not k_max > 0:
        raise DegenerateGeometryError("trajectory is identically zero")
    ratio = DEFAULT_OVERSAMPLING if oversampling_ratio is None else float(oversampling_ratio)
    if ratio < 1:
        raise ParameterError(f"oversampling ratio must be >= 1, got {ratio}")

    grid_size = _even_ceil(2.0 * k_max)
    matrix_size = max(_even_round(grid_size / ratio), 2)
    return GridGeometry(
        matrix_size=matrix_size,
        grid_size=grid_size,
        oversampling_ratio=grid_size / matrix_size,
        delta_k=1.0 / grid_size,
        k_max=k_max,
    )


def undersample(raw: KSpaceDataset, scheme: str, value: int) -> KSpaceDataset:
    """Select a subset of spokes.

    Args:
        raw: source dataset.
        scheme: "skip" keeps every ``value``-th spoke starting at 0,
            "first" keeps spokes 0 .. value-1.
        value: undersampling factor or spoke count.

    Returns:
        Dataset whose sample and trajectory arrays are views of the source.
    """
    if scheme not in UNDERSAMPLING_SCHEMES:
        raise RangeError(f"unknown undersampling scheme '{scheme}'")
    value = int(value)
    if value < 1:
        raise RangeError(f"undersampling value must be >= 1, got {value}")
    if scheme == "skip":
        if value > raw.n_spokes:
            raise RangeError(f"factor {value} exceeds {raw.n_spokes} spokes")
        index = slice(None, None, value)
    else:
        if value > raw.n_spokes:
            raise RangeError(f"count {value} exceeds {raw.n_spokes} spokes")
        index = slice(0, value)
    return replace(
        raw,
        samples=raw.samples[:, index],
        trajectory=raw.trajectory[:, index],
    )
