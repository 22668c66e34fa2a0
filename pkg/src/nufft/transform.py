"""Centered FFT pair, deapodization and the composed non-uniform FFT."""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.data import GridGeometry
from src.errors import ParameterError, ShapeError
from src.nufft.gridding import Gridder
from src.nufft.kernel import GriddingKernel

APODIZATION_FLOOR = 1e-6


def _check_even(array: np.ndarray) -> None:
    rows, cols = array.shape[-2:]
    if rows % 2 or cols % 2:
        raise ParameterError(f"centered FFT needs even sizes, got {rows}x{cols}")


def fft_centered(image: np.ndarray) -> np.ndarray:
    """Unitary 2D FFT over the last two axes with DC at the array center."""
    _check_even(image)
    axes = (-2, -1)
    return np.fft.fftshift(
        np.fft.fft2(np.fft.ifftshift(image, axes=axes), axes=axes, norm="ortho"), axes=axes
    )


def ifft_centered(kspace: np.ndarray) -> np.ndarray:
    """Inverse of ``fft_centered``."""
    _check_even(kspace)
    axes = (-2, -1)
    return np.fft.fftshift(
        np.fft.ifft2(np.fft.ifftshift(kspace, axes=axes), axes=axes, norm="ortho"), axes=axes
    )


def crop_center(array: np.ndarray, size: int) -> np.ndarray:
    """Symmetric crop of the last two axes to size x size."""
    rows, cols = array.shape[-2:]
    if size > rows or size > cols:
        raise ShapeError(f"cannot crop {rows}x{cols} to {size}x{size}")
    r0, c0 = (rows - size) // 2, (cols - size) // 2
    return array[..., r0:r0 + size, c0:c0 + size]


def pad_center(array: np.ndarray, size: int) -> np.ndarray:
    """Zero-pad the last two axes symmetrically to size x size; adjoint of crop_center."""
    rows, cols = array.shape[-2:]
    out = np.zeros(array.shape[:-2] + (size, size), dtype=np.result_type(array, np.complex128))
    r0, c0 = (size - rows) // 2, (size - cols) // 2
    out[..., r0:r0 + rows, c0:c0 + cols] = array
    return out


@dataclass(frozen=True)
class Apodization:
    """Image-space roll-off of the gridding kernel on the oversampled grid.

    Attributes:
        map: |FT of the gridded kernel| normalized to max 1 [grid, grid].
        scale: n_os / (n * kernel mass); maps the gridded FFT onto the
            direct DFT normalization.
    """

    map: np.ndarray
    scale: float

    def correction(self) -> np.ndarray:
        """Real factor applied in both NUFFT directions."""
        return self.scale / np.maximum(self.map, APODIZATION_FLOOR)


def compute_apodization(kernel: GriddingKernel, geometry: GridGeometry) -> Apodization:
    """Transform a unit sample gridded at DC into image space.

    Args:
        kernel: gridding kernel.
        geometry: target grid.

    Returns:
        Apodization on the oversampled grid, max 1.
    """
    gridder = Gridder(np.zeros((2, 1)), kernel, geometry.grid_size)
    footprint = gridder.spread(np.ones(1))
    mass = float(footprint.real.sum())
    profile = np.abs(ifft_centered(footprint))
    profile = profile / profile.max()
    profile.setflags(write=False)
    return Apodization(
        map=profile, scale=geometry.grid_size / (geometry.matrix_size * mass)
    )


class Nufft:
    """Non-uniform FFT for one trajectory, kernel and geometry.

    ``forward`` maps an n x n image to samples, ``adjoint`` maps samples back.
    Both apply the square root of the density weights, so they form an exact
    adjoint pair.
    """

    def __init__(
        self,
        trajectory: np.ndarray,
        kernel: GriddingKernel,
        geometry: GridGeometry,
        dcf: Optional[np.ndarray] = None,
        apodization: Optional[Apodization] = None,
    ) -> None:
        self.geometry = geometry
        self.kernel = kernel
        self.gridder = Gridder(trajectory, kernel, geometry.grid_size)
        self.apodization = apodization or compute_apodization(kernel, geometry)
        self._correction = self.apodization.correction()
        self.sqrt_dcf = None if dcf is None else np.sqrt(np.asarray(dcf, dtype=np.float64))

    @property
    def n_dropped(self) -> int:
        return self.gridder.n_dropped

    def forward(self, image: np.ndarray) -> np.ndarray:
        """Zero-pad, deapodize, FFT and degrid an image [..., n, n]."""
        n = self.geometry.matrix_size
        if image.shape[-2:] != (n, n):
            raise ShapeError(f"image {image.shape} does not match matrix size {n}")
        padded = pad_center(image, self.geometry.grid_size) * self._correction
        samples = self.gridder.interpolate(fft_centered(padded))
        if self.sqrt_dcf is not None:
            samples = samples * self.sqrt_dcf
        return samples

    def adjoint(self, samples: np.ndarray) -> np.ndarray:
        """Grid, inverse FFT, deapodize and crop samples [..., spoke, read]."""
        if self.sqrt_dcf is not None:
            samples = samples * self.sqrt_dcf
        kspace = self.gridder.spread(samples)
        image = ifft_centered(kspace) * self._correction
        return crop_center(image, self.geometry.matrix_size)


def nufft_forward(
    image: np.ndarray,
    trajectory: np.ndarray,
    kernel: GriddingKernel,
    geometry: GridGeometry,
    dcf: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Image [..., n, n] to samples [..., spoke, read]."""
    return Nufft(trajectory, kernel, geometry, dcf).forward(image)


def nufft_adjoint(
    samples: np.ndarray,
    trajectory: np.ndarray,
    kernel: GriddingKernel,
    geometry: GridGeometry,
    dcf: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Samples [..., spoke, read] to image [..., n, n]."""
    return Nufft(trajectory, kernel, geometry, dcf).adjoint(samples)


def gridding_reconstruction(
    samples: np.ndarray,
    trajectory: np.ndarray,
    kernel: GriddingKernel,
    geometry: GridGeometry,
    dcf: np.ndarray,
) -> np.ndarray:
    """Density-compensated adjoint NUFFT, one image per leading index."""
    return Nufft(trajectory, kernel, geometry).adjoint(samples * dcf)
