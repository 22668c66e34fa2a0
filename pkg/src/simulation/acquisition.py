"""Direct DFT oracle and simulated multi-coil acquisitions."""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.coils import NoiseModel, SensitivitySet
from src.data import KSpaceDataset
from src.errors import ParameterError, ShapeError
from src.kspace_filter import kspace_radius
from src.nufft import fft_centered, ifft_centered

DEFAULT_MAX_COST = 5e9


def direct_dft(
    image: np.ndarray,
    trajectory: np.ndarray,
    grid_size: Optional[int] = None,
    max_cost: float = DEFAULT_MAX_COST,
) -> np.ndarray:
    """Brute-force non-uniform DFT.

    s = (1/n) sum_p image[p] exp(-2 pi i k . x_p / grid_size) with pixel
    positions x_p = p - n/2, the centering and scale of ``fft_centered``.

    Args:
        image: [..., n, n].
        trajectory: [axis, ...] in cells of a grid of size ``grid_size``.
        grid_size: defaults to n.
        max_cost: refuse when samples * n^2 * images exceeds this.

    Returns:
        Samples [..., *trajectory.shape[1:]].
    """
    image = np.asarray(image)
    n = image.shape[-1]
    if image.shape[-2] != n:
        raise ShapeError(f"image must be square, got {image.shape}")
    grid_size = n if grid_size is None else grid_size
    trajectory = np.asarray(trajectory, dtype=np.float64)
    sample_shape = trajectory.shape[1:]
    kx, ky = trajectory[0].ravel(), trajectory[1].ravel()
    lead = image.shape[:-2]
    n_images = int(np.prod(lead)) if lead else 1
    cost = kx.size * n * n * n_images
    if cost > max_cost:
        raise ParameterError(f"direct DFT cost {cost:.2e} exceeds limit {max_cost:.2e}")

    position = np.arange(n) - n / 2.0
    ex = np.exp(-2j * np.pi * np.outer(kx, position) / grid_size)
    ey = np.exp(-2j * np.pi * np.outer(ky, position) / grid_size)
    flat = image.reshape(n_images, n, n)
    out = np.empty((n_images, kx.size), dtype=np.complex128)
    for i, img in enumerate(flat):
        partial = ex @ img.T
        out[i] = np.sum(ey * partial, axis=1) / n
    return out.reshape(*lead, *sample_shape)


def band_limit(phantom: np.ndarray, trajectory: np.ndarray, grid_size: int) -> np.ndarray:
    """Phantom restricted to the k-space disk the trajectory covers.

    The corners of the square n x n spectrum are never measured, so this is
    the best image the data can support.
    """
    n = phantom.shape[-1]
    radius = float(np.hypot(trajectory[0], trajectory[1]).max())
    cutoff = radius * n / grid_size
    spectrum = fft_centered(phantom)
    spectrum[kspace_radius(n) > cutoff] = 0
    return ifft_centered(spectrum)


@dataclass(frozen=True)
class SimulatedAcquisition:
    """Dataset plus the ground truth it was made from.

    ``reference`` is the phantom band-limited to the acquired disk.
    """

    dataset: KSpaceDataset
    phantom: np.ndarray
    maps: SensitivitySet
    noise_level: float = 0.0
    reference: Optional[np.ndarray] = None


def simulate_acquisition(
    phantom: np.ndarray,
    maps: SensitivitySet,
    trajectory: np.ndarray,
    grid_size: int,
    noise: Optional[NoiseModel] = None,
    snr: Optional[float] = None,
    rng: Optional[np.random.Generator] = None,
    noise_scan_samples: int = 0,
) -> SimulatedAcquisition:
    """Sample coil images with the direct DFT and add correlated noise.

    Args:
        phantom: [n, n] image.
        maps: coil sensitivities on the same matrix.
        trajectory: [3, spoke, read] in grid cells.
        grid_size: oversampled grid size of the trajectory units.
        noise: covariance of the receiver noise; identity when only snr is given.
        snr: rms(signal) / noise level; level 1 when None and noise is given.
        rng: random generator for the noise.
        noise_scan_samples: length of a separate noise-only scan to attach.

    Returns:
        SimulatedAcquisition with unwhitened samples [coil, spoke, read].
    """
    phantom = np.asarray(phantom)
    if phantom.shape != maps.shape:
        raise ShapeError(f"phantom {phantom.shape} does not match maps {maps.maps.shape}")
    n = phantom.shape[-1]
    clean = direct_dft(maps.maps * phantom, trajectory, grid_size)
    reference = band_limit(phantom, trajectory, grid_size)

    if noise is None and snr is None:
        dataset = KSpaceDataset(
            samples=clean,
            trajectory=np.asarray(trajectory, dtype=np.float64),
            oversampling_ratio=grid_size / n,
        )
        return SimulatedAcquisition(
            dataset=dataset, phantom=phantom, maps=maps, reference=reference
        )

    rng = rng or np.random.default_rng()
    n_coils = maps.n_coils
    if noise is None:
        noise = NoiseModel.from_covariance(np.eye(n_coils))
    if snr is not None:
        if not snr > 0:
            raise ParameterError(f"snr must be positive, got {snr}")
        level = float(np.sqrt(np.mean(np.abs(clean) ** 2))) / snr
    else:
        level = 1.0
    factor = level * np.linalg.cholesky(noise.covariance)

    def draw(shape) -> np.ndarray:
        z = (rng.standard_normal((n_coils,) + shape) + 1j * rng.standard_normal((n_coils,) + shape))
        return np.tensordot(factor, z / np.sqrt(2.0), axes=(1, 0))

    samples = clean + draw(clean.shape[1:])
    noise_scan = draw((noise_scan_samples,)) if noise_scan_samples > 0 else None
    dataset = KSpaceDataset(
        samples=samples,
        trajectory=np.asarray(trajectory, dtype=np.float64),
        noise_covariance=level ** 2 * noise.covariance,
        noise_scan=noise_scan,
        oversampling_ratio=grid_size / n,
    )
    return SimulatedAcquisition(
        dataset=dataset, phantom=phantom, maps=maps, noise_level=level, reference=reference
    )
