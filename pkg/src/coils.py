"""Coil sensitivities, intensity correction and noise pre-whitening."""
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy import linalg
from scipy.ndimage import binary_closing

from src.data import GridGeometry, KSpaceDataset
from src.dcf import dcf_gridded_ones
from src.errors import FactorizationError, NumericError, ShapeError
from src.nufft import GriddingKernel, Nufft
from src.utils.parallel import map_coils

LOADED_MAP_THRESHOLD = 1e-8


@dataclass(frozen=True)
class SensitivitySet:
    """Complex coil maps with their l2 intensity and support mask."""

    maps: np.ndarray
    intensity: np.ndarray
    support_mask: np.ndarray

    @classmethod
    def from_maps(
        cls,
        maps: np.ndarray,
        threshold: float = LOADED_MAP_THRESHOLD,
        mask: Optional[np.ndarray] = None,
    ) -> "SensitivitySet":
        """Build a set from raw maps [coil, row, col].

        Args:
            maps: complex sensitivities.
            threshold: support is intensity > threshold * max(intensity).
            mask: explicit support; maps are zeroed outside it.
        """
        maps = np.asarray(maps, dtype=np.complex128)
        if maps.ndim != 3:
            raise ShapeError(f"maps must be [coil, row, col], got {maps.shape}")
        intensity = np.sqrt(np.sum(np.abs(maps) ** 2, axis=0))
        if mask is None:
            mask = intensity > threshold * intensity.max()
        else:
            mask = np.asarray(mask, dtype=bool) & (intensity > 0)
            maps = np.where(mask, maps, 0)
            intensity = np.where(mask, intensity, 0.0)
        return cls(maps=maps, intensity=intensity, support_mask=mask)

    @property
    def n_coils(self) -> int:
        return self.maps.shape[0]

    @property
    def shape(self):
        return self.maps.shape[1:]

    def inverse_intensity(self) -> np.ndarray:
        """1 / intensity on the support mask, 0 elsewhere."""
        out = np.zeros_like(self.intensity)
        out[self.support_mask] = 1.0 / self.intensity[self.support_mask]
        return out

    def whiten(self, whitener: np.ndarray) -> "SensitivitySet":
        """Apply a coil-mixing matrix to the maps."""
        maps = np.tensordot(whitener, self.maps, axes=(1, 0))
        return SensitivitySet.from_maps(maps, mask=self.support_mask)


def intensity_correction_map(sens: SensitivitySet) -> np.ndarray:
    """Intensity field sqrt(sum_c |S_c|^2) used to correct the CG iterate."""
    return sens.intensity


def hanning_taper(
    trajectory: np.ndarray, window_width: float, oversampling_ratio: float = 1.0
) -> np.ndarray:
    """Radial Hanning window of total width ``window_width`` about DC.

    The width counts cycles of the reconstructed n x n image, so grid-unit
    radii are divided by the oversampling ratio.
    """
    radius = np.hypot(trajectory[0], trajectory[1]) / oversampling_ratio
    return np.where(
        radius < window_width / 2.0,
        0.5 * (1.0 + np.cos(2.0 * np.pi * radius / window_width)),
        0.0,
    )


def estimate_sensitivities_sos(
    dataset: KSpaceDataset,
    kernel: GriddingKernel,
    geometry: GridGeometry,
    window_width: float = 50,
    threshold: float = 0.1,
    dcf: Optional[np.ndarray] = None,
    threads: int = 0,
) -> SensitivitySet:
    """Low-resolution sum-of-squares sensitivity estimate.

    Args:
        dataset: k-space data with at least one coil.
        kernel: gridding kernel.
        geometry: reconstruction grid.
        window_width: Hanning taper width in image k-space cycles.
        threshold: support is SoS > threshold * max(SoS), then closed.
        dcf: density weights; gridded-ones weights if None.
        threads: worker count for per-coil gridding.

    Returns:
        SensitivitySet with maps = coil image / SoS on the support, 0 elsewhere.
    """
    if dataset.n_coils < 1:
        raise ShapeError("dataset has no coils")
    if not np.any(dataset.samples):
        raise NumericError("cannot estimate sensitivities from all-zero data")
    if dcf is None:
        dcf = dcf_gridded_ones(dataset.trajectory, kernel)

    taper = hanning_taper(dataset.trajectory, window_width, geometry.oversampling_ratio)
    nufft = Nufft(dataset.trajectory, kernel, geometry)
    weights = taper * dcf

    def coil_image(c: int) -> np.ndarray:
        return nufft.adjoint(dataset.samples[c] * weights)

    images = np.stack(map_coils(coil_image, range(dataset.n_coils), threads))

    sos = np.sqrt(np.sum(np.abs(images) ** 2, axis=0))
    mask = binary_closing(sos > threshold * sos.max(), iterations=2) & (sos > 0)
    maps = np.zeros_like(images)
    maps[:, mask] = images[:, mask] / sos[mask]
    return SensitivitySet.from_maps(maps, mask=mask)


@dataclass(frozen=True)
class NoiseModel:
    """Receiver noise covariance with its whitening matrix W = L^-1."""

    covariance: np.ndarray
    whitener: np.ndarray

    @classmethod
    def from_covariance(cls, covariance: np.ndarray) -> "NoiseModel":
        covariance = np.asarray(covariance, dtype=np.complex128)
        if covariance.ndim != 2 or covariance.shape[0] != covariance.shape[1]:
            raise ShapeError(f"covariance must be square, got {covariance.shape}")
        covariance = 0.5 * (covariance + covariance.conj().T)
        smallest = float(linalg.eigvalsh(covariance)[0])
        if smallest <= 0:
            raise FactorizationError(smallest)
        try:
            lower = linalg.cholesky(covariance, lower=True)
        except linalg.LinAlgError as e:
            raise FactorizationError(smallest) from e
        whitener = linalg.solve_triangular(
            lower, np.eye(covariance.shape[0], dtype=np.complex128), lower=True
        )
        return cls(covariance=covariance, whitener=whitener)


def estimate_noise_covariance(noise_samples: np.ndarray) -> np.ndarray:
    """Covariance X X^H / n of a zero-mean noise scan [coil, sample]."""
    noise = np.asarray(noise_samples).reshape(np.shape(noise_samples)[0], -1)
    if noise.shape[1] < 2:
        raise ShapeError("noise scan needs at least two samples per coil")
    return noise @ noise.conj().T / noise.shape[1]


def prewhiten(dataset: KSpaceDataset, noise: NoiseModel) -> KSpaceDataset:
    """Mix coils with W so that the noise becomes white; sensitivities follow."""
    if noise.whitener.shape[0] != dataset.n_coils:
        raise ShapeError(
            f"noise model has {noise.whitener.shape[0]} coils, data has {dataset.n_coils}"
        )
    samples = np.tensordot(noise.whitener, dataset.samples, axes=(1, 0))
    sensitivities = dataset.sensitivities
    if sensitivities is not None:
        sensitivities = np.tensordot(noise.whitener, sensitivities, axes=(1, 0))
    noise_scan = dataset.noise_scan
    if noise_scan is not None:
        noise_scan = noise.whitener @ noise_scan
    return replace(
        dataset,
        samples=samples,
        sensitivities=sensitivities,
        noise_scan=noise_scan,
        noise_covariance=np.eye(dataset.n_coils, dtype=np.complex128),
        whitened=True,
    )
