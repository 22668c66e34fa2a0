"""Coil sensitivity and noise pre-whitening tests."""
from dataclasses import replace

import numpy as np
import pytest
from conftest import interior_mask

from src.coils import (
    NoiseModel,
    SensitivitySet,
    estimate_noise_covariance,
    estimate_sensitivities_sos,
    hanning_taper,
    prewhiten,
)
from src.data import KSpaceDataset, derive_geometry
from src.errors import FactorizationError, NumericError
from src.nufft import build_kernel
from src.simulation import (
    make_phantom,
    make_radial_trajectory,
    shepp_logan_spec,
    simulate_acquisition,
)


def random_covariance(n: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return a @ a.conj().T / n + 0.5 * np.eye(n)


class TestSensitivitySet:
    """Test map containers."""

    # pylint: disable=no-self-use

    MAPS = np.stack([np.full((4, 4), 3.0 + 0j), np.full((4, 4), 4.0j)])

    def test_intensity(self):
        """Intensity is the coil-wise l2 norm."""
        sens = SensitivitySet.from_maps(self.MAPS)
        np.testing.assert_allclose(sens.intensity, 5.0)
        assert sens.n_coils == 2
        assert sens.shape == (4, 4)

    def test_mask_zeroes_outside(self):
        """An explicit mask removes support and inverse intensity outside it."""
        mask = np.zeros((4, 4), dtype=bool)
        mask[1:3, 1:3] = True
        sens = SensitivitySet.from_maps(self.MAPS, mask=mask)
        assert np.all(sens.maps[:, ~mask] == 0)
        inverse = sens.inverse_intensity()
        np.testing.assert_allclose(inverse[mask], 0.2)
        assert np.all(inverse[~mask] == 0)

    def test_threshold(self):
        """Loaded maps below the threshold are outside the support."""
        maps = self.MAPS.copy()
        maps[:, 0, 0] = 0
        sens = SensitivitySet.from_maps(maps)
        assert not sens.support_mask[0, 0]
        assert sens.support_mask.sum() == 15

    def test_hanning_taper(self):
        """1 at DC, 0 beyond half the width."""
        trajectory = np.zeros((3, 1, 4))
        trajectory[0, 0] = [0.0, 12.5, 25.0, 40.0]
        taper = hanning_taper(trajectory, 50)
        np.testing.assert_allclose(taper[0], [1.0, 0.5, 0.0, 0.0], atol=1e-12)

    def test_hanning_taper_image_cycles(self):
        """On a twice oversampled grid the width counts image cycles."""
        trajectory = np.zeros((3, 1, 3))
        trajectory[0, 0] = [0.0, 25.0, 50.0]
        taper = hanning_taper(trajectory, 50, oversampling_ratio=2.0)
        np.testing.assert_allclose(taper[0], [1.0, 0.5, 0.0], atol=1e-12)


class TestSosEstimate:
    """Test sum-of-squares sensitivity estimation."""

    # pylint: disable=no-self-use

    N = 32

    def _estimate(self, maps: np.ndarray) -> SensitivitySet:
        phantom = make_phantom(shepp_logan_spec(self.N))
        trajectory = make_radial_trajectory(51, 64, 64)
        acquisition = simulate_acquisition(
            phantom, SensitivitySet.from_maps(maps), trajectory, 2 * self.N
        )
        dataset = acquisition.dataset
        geometry = derive_geometry(dataset.trajectory, dataset.oversampling_ratio)
        return estimate_sensitivities_sos(dataset, build_kernel(), geometry)

    def test_maps(self, phantom_acquisition):
        """Estimated maps have unit intensity and follow the true coils."""
        dataset = phantom_acquisition.dataset
        kernel = build_kernel()
        geometry = derive_geometry(dataset.trajectory, dataset.oversampling_ratio)
        sens = estimate_sensitivities_sos(dataset, kernel, geometry, threads=2)
        mask = sens.support_mask
        assert sens.shape == (64, 64)
        assert mask[32, 32]
        assert not mask[0, 0]
        np.testing.assert_allclose(sens.intensity[mask], 1.0, atol=1e-10)

        truth = phantom_acquisition.maps.maps / phantom_acquisition.maps.intensity
        inside = mask & interior_mask(phantom_acquisition.phantom)
        error, norm = 0.0, 0.0
        for est, ref in zip(sens.maps, truth):
            a, b = est[inside], ref[inside]
            # a global phase per coil is not identifiable
            b = b * np.exp(1j * np.angle(np.vdot(b, a)))
            error += np.sum(np.abs(a - b) ** 2)
            norm += np.sum(np.abs(b))
        n_values = truth.shape[0] * inside.sum()
        assert np.sqrt(error / n_values) / (norm / n_values) < 0.05

    def test_single_flat_coil(self):
        """One uniform coil gives a unit-magnitude map on the support."""
        sens = self._estimate(np.ones((1, self.N, self.N)))
        mask = sens.support_mask
        assert mask[self.N // 2, self.N // 2]
        np.testing.assert_allclose(np.abs(sens.maps[0][mask]), 1.0, atol=1e-10)

    def test_identical_coils(self):
        """Two identical coils share the intensity equally."""
        sens = self._estimate(np.ones((2, self.N, self.N)))
        mask = sens.support_mask
        np.testing.assert_allclose(np.abs(sens.maps[:, mask]), 1.0 / np.sqrt(2.0), atol=1e-10)
        np.testing.assert_array_equal(sens.maps[0], sens.maps[1])

    def test_thread_count_invariant(self, small_acquisition):
        """One and four workers give identical maps."""
        dataset = small_acquisition.dataset
        kernel = build_kernel()
        geometry = derive_geometry(dataset.trajectory)
        one = estimate_sensitivities_sos(dataset, kernel, geometry, threads=1)
        four = estimate_sensitivities_sos(dataset, kernel, geometry, threads=4)
        np.testing.assert_array_equal(one.maps, four.maps)

    def test_zero_data(self, small_acquisition):
        """All-zero data has no sensitivity information."""
        dataset = small_acquisition.dataset
        zero = replace(dataset, samples=np.zeros_like(dataset.samples))
        kernel = build_kernel()
        with pytest.raises(NumericError):
            estimate_sensitivities_sos(zero, kernel, derive_geometry(dataset.trajectory))


class TestPrewhitening:
    """Test noise covariance factorization and whitening."""

    # pylint: disable=no-self-use

    N_COILS = 4
    N_DRAWS = 100000

    def _noise(self, covariance: np.ndarray, seed: int = 1) -> np.ndarray:
        rng = np.random.default_rng(seed)
        z = rng.standard_normal((self.N_COILS, self.N_DRAWS)) + 1j * rng.standard_normal(
            (self.N_COILS, self.N_DRAWS)
        )
        return np.linalg.cholesky(covariance) @ z / np.sqrt(2.0)

    def test_whitened_covariance_is_identity(self):
        """Whitened correlated noise has identity covariance."""
        covariance = random_covariance(self.N_COILS)
        noise = self._noise(covariance)
        dataset = KSpaceDataset(
            samples=noise.reshape(self.N_COILS, 1000, 100),
            trajectory=np.zeros((3, 1000, 100)),
            noise_covariance=covariance,
        )
        white = prewhiten(dataset, NoiseModel.from_covariance(covariance))
        empirical = estimate_noise_covariance(white.samples)
        assert np.abs(empirical - np.eye(self.N_COILS)).max() < 0.05
        assert white.whitened
        np.testing.assert_array_equal(white.noise_covariance, np.eye(self.N_COILS))

    def test_covariance_estimate(self):
        """The noise scan estimate approaches the true covariance."""
        covariance = random_covariance(self.N_COILS, seed=2)
        empirical = estimate_noise_covariance(self._noise(covariance, seed=3))
        assert np.abs(empirical - covariance).max() < 0.05 * np.abs(covariance).max()

    def test_whitener(self):
        """W C W^H = I."""
        covariance = random_covariance(self.N_COILS, seed=4)
        w = NoiseModel.from_covariance(covariance).whitener
        np.testing.assert_allclose(w @ covariance @ w.conj().T, np.eye(self.N_COILS), atol=1e-10)

    def test_sensitivities_follow(self):
        """Stored maps and noise scans are mixed with the same matrix."""
        covariance = random_covariance(2, seed=5)
        model = NoiseModel.from_covariance(covariance)
        maps = np.ones((2, 4, 4), dtype=np.complex128)
        scan = np.ones((2, 10), dtype=np.complex128)
        dataset = KSpaceDataset(
            samples=np.ones((2, 3, 4), dtype=np.complex128),
            trajectory=np.zeros((3, 3, 4)),
            sensitivities=maps,
            noise_scan=scan,
        )
        white = prewhiten(dataset, model)
        np.testing.assert_allclose(white.sensitivities[:, 0, 0], model.whitener @ maps[:, 0, 0])
        np.testing.assert_allclose(white.noise_scan, model.whitener @ scan)

    def test_not_positive_definite(self):
        """A covariance with a negative eigenvalue cannot be factorized."""
        with pytest.raises(FactorizationError) as e:
            NoiseModel.from_covariance(np.diag([1.0, -2.0]))
        assert e.value.eigenvalue == pytest.approx(-2.0)
