"""SENSE encoding operators and the normal equations they define."""
from abc import ABC, abstractmethod
from typing import Optional, Tuple

import numpy as np

from src.coils import SensitivitySet
from src.data import GridGeometry
from src.errors import ParameterError, ShapeError
from src.nufft import GriddingKernel, Nufft
from src.utils.parallel import map_coils


class NormalOperator(ABC):
    """Hermitian positive semi-definite system A y = b solved by CG."""

    lam: float = 0.0
    dropped_sample_count: int = 0

    @property
    @abstractmethod
    def shape(self) -> Tuple[int, ...]:
        """Shape of the unknown."""

    @abstractmethod
    def normal(self, x: np.ndarray) -> np.ndarray:
        """Apply A."""

    @abstractmethod
    def right_hand_side(self, data: np.ndarray) -> np.ndarray:
        """Build b from measured data."""

    def intensity_correct(self, y: np.ndarray) -> np.ndarray:
        """Map a CG iterate to the image it represents."""
        return y


class MatrixOperator(NormalOperator):
    """Dense Hermitian matrix wrapped as a normal operator; b is given directly."""

    def __init__(self, matrix: np.ndarray, lam: float = 0.0) -> None:
        matrix = np.asarray(matrix)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ShapeError(f"matrix must be square, got {matrix.shape}")
        if lam < 0:
            raise ParameterError(f"lambda must be >= 0, got {lam}")
        self.matrix = matrix
        self.lam = float(lam)

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.matrix.shape[0],)

    def normal(self, x: np.ndarray) -> np.ndarray:
        out = self.matrix @ x
        if self.lam > 0:
            out = out + self.lam * x
        return out

    def right_hand_side(self, data: np.ndarray) -> np.ndarray:
        return np.asarray(data, dtype=np.result_type(data, self.matrix, np.complex128))


class EncodingOperator(NormalOperator):
    """Density-weighted multi-coil encoding with intensity correction.

    With E = maps * NUFFT, D the density weights and I the inverse
    intensity on the support mask, the solved system is
    (I E^H D E I + lam) y = I E^H D m and the image is I y.
    """

    def __init__(
        self,
        sensitivities: SensitivitySet,
        trajectory: np.ndarray,
        kernel: GriddingKernel,
        geometry: GridGeometry,
        dcf: Optional[np.ndarray] = None,
        lam: float = 0.0,
        threads: int = 0,
    ) -> None:
        """Initialize EncodingOperator.

        Args:
            sensitivities: coil maps on the n x n matrix.
            trajectory: [axis, spoke, read] in grid cells.
            kernel: gridding kernel.
            geometry: reconstruction grid.
            dcf: density weights [spoke, read]; none if None.
            lam: Tikhonov weight, >= 0.
            threads: worker count for coil-parallel work.
        """
        n = geometry.matrix_size
        if sensitivities.shape != (n, n):
            raise ShapeError(
                f"sensitivities {sensitivities.maps.shape} do not match matrix size {n}"
            )
        if lam < 0:
            raise ParameterError(f"lambda must be >= 0, got {lam}")
        self.sensitivities = sensitivities
        self.geometry = geometry
        self.lam = float(lam)
        self.threads = threads
        self.nufft = Nufft(trajectory, kernel, geometry, dcf)
        self.sqrt_dcf = self.nufft.sqrt_dcf
        self.sample_shape = (sensitivities.n_coils,) + np.shape(trajectory)[1:]
        self.correction = sensitivities.inverse_intensity()
        self.dropped_sample_count = self.nufft.n_dropped

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.geometry.matrix_size,) * 2

    def _check_image(self, image: np.ndarray) -> None:
        if image.shape != self.shape:
            raise ShapeError(f"image {image.shape} does not match {self.shape}")

    def _check_samples(self, samples: np.ndarray) -> None:
        if samples.shape != self.sample_shape:
            raise ShapeError(f"samples {samples.shape} do not match {self.sample_shape}")

    def apply_forward(self, image: np.ndarray) -> np.ndarray:
        """Image [n, n] to density-weighted samples [coil, spoke, read]."""
        self._check_image(image)
        maps = self.sensitivities.maps

        def coil(c: int) -> np.ndarray:
            return self.nufft.forward(maps[c] * image)

        return np.stack(map_coils(coil, range(len(maps)), self.threads))

    def apply_adjoint(self, samples: np.ndarray) -> np.ndarray:
        """Samples [coil, spoke, read] to the coil-combined image [n, n]."""
        self._check_samples(samples)
        maps = self.sensitivities.maps

        def coil(c: int) -> np.ndarray:
            return np.conj(maps[c]) * self.nufft.adjoint(samples[c])

        images = map_coils(coil, range(len(maps)), self.threads)
        out = images[0].copy()
        for image in images[1:]:
            out += image
        return out

    def normal(self, x: np.ndarray) -> np.ndarray:
        return self.apply_normal(x)

    def apply_normal(self, image: np.ndarray) -> np.ndarray:
        """I E^H D E I x + lam x."""
        out = self.correction * self.apply_adjoint(self.apply_forward(self.correction * image))
        if self.lam > 0:
            out = out + self.lam * image
        return out

    def right_hand_side(self, data: np.ndarray) -> np.ndarray:
        """I E^H D m for measured samples m [coil, spoke, read]."""
        self._check_samples(data)
        if self.sqrt_dcf is not None:
            data = data * self.sqrt_dcf
        return self.correction * self.apply_adjoint(data)

    def intensity_correct(self, y: np.ndarray) -> np.ndarray:
        return self.correction * y


def apply_forward(op: EncodingOperator, image: np.ndarray) -> np.ndarray:
    return op.apply_forward(image)


def apply_adjoint(op: EncodingOperator, samples: np.ndarray) -> np.ndarray:
    return op.apply_adjoint(samples)


def apply_normal(op: EncodingOperator, image: np.ndarray) -> np.ndarray:
    return op.apply_normal(image)
