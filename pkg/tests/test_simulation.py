"""Phantom, coil, trajectory and acquisition simulator tests."""
import numpy as np
import pytest

from src.coils import NoiseModel
from src.data import validate_dataset
from src.errors import ParameterError, ShapeError
from src.kspace_filter import kspace_radius
from src.nufft import fft_centered
from src.simulation import (
    band_limit,
    direct_dft,
    make_coil_maps,
    make_phantom,
    make_radial_trajectory,
    make_spiral_trajectory,
    shepp_logan_spec,
    simulate_acquisition,
)
from src.simulation.phantom import Ellipse, PhantomSpec, normalized_grid


class TestPhantom:
    """Test the ellipse phantom."""

    # pylint: disable=no-self-use

    PHANTOM = make_phantom(shepp_logan_spec(64))

    def test_values(self):
        """Complex image with background 0, skull 1 and brain 0.2."""
        assert self.PHANTOM.dtype == np.complex128
        assert self.PHANTOM.shape == (64, 64)
        assert self.PHANTOM[0, 0] == 0
        assert np.abs(self.PHANTOM).max() == pytest.approx(1.0)
        assert self.PHANTOM[40, 32].real == pytest.approx(0.2)

    def test_orientation(self):
        """y points up: an ellipse at positive y lands in the top half."""
        spec = PhantomSpec(16, [Ellipse(1.0, (0.2, 0.2), (0.0, 0.5))])
        image = make_phantom(spec)
        rows = np.nonzero(image.real)[0]
        assert rows.max() < 8
        x, y = normalized_grid(16)
        assert x[0, 0] < 0 < y[0, 0]


class TestCoilMaps:
    """Test synthetic sensitivities."""

    # pylint: disable=no-self-use

    def test_coverage(self):
        """Every pixel is seen by some coil."""
        maps = make_coil_maps(32, 8)
        assert maps.n_coils == 8
        assert maps.shape == (32, 32)
        assert maps.intensity.min() > 0.1
        assert maps.support_mask.all()

    def test_distinct_coils(self):
        """Coils peak on different sides of the FOV."""
        maps = make_coil_maps(32, 4).maps
        peaks = {np.unravel_index(np.argmax(np.abs(m)), m.shape) for m in maps}
        assert len(peaks) == 4

    def test_no_coils(self):
        """Zero coils are rejected."""
        with pytest.raises(ParameterError):
            make_coil_maps(32, 0)


class TestTrajectories:
    """Test radial and spiral generators."""

    # pylint: disable=no-self-use

    def test_radial(self):
        """Spokes through DC with unit spacing on a matched grid."""
        trajectory = make_radial_trajectory(10, 64, 64)
        assert trajectory.shape == (3, 10, 64)
        assert np.all(trajectory[2] == 0)
        assert np.all(trajectory[:2, :, 32] == 0)
        np.testing.assert_allclose(np.hypot(*trajectory[:2, :, 0]), 32.0)
        steps = np.hypot(*np.diff(trajectory[:2], axis=-1))
        np.testing.assert_allclose(steps, 1.0)

    def test_alternate(self):
        """Every odd spoke runs backwards."""
        plain = make_radial_trajectory(4, 16, 16)
        alternate = make_radial_trajectory(4, 16, 16, alternate=True)
        np.testing.assert_array_equal(alternate[:, 0], plain[:, 0])
        np.testing.assert_array_equal(alternate[:, 1], plain[:, 1, ::-1])

    def test_odd_readout(self):
        """Readouts need an even length to contain DC."""
        with pytest.raises(ParameterError):
            make_radial_trajectory(4, 15, 16)

    def test_spiral(self):
        """Interleaves start at DC and stay inside the grid."""
        trajectory = make_spiral_trajectory(4, 200, 64)
        assert trajectory.shape == (3, 4, 200)
        assert np.all(trajectory[:2, :, 0] == 0)
        assert np.hypot(trajectory[0], trajectory[1]).max() < 32.0


class TestDirectDft:
    """Test the brute-force transform."""

    # pylint: disable=no-self-use

    IMAGE = np.random.default_rng(0).standard_normal((8, 8)) + 0j

    def test_centered_delta(self):
        """A delta at the center has a flat spectrum of 1/n."""
        image = np.zeros((8, 8))
        image[4, 4] = 1.0
        trajectory = make_radial_trajectory(3, 16, 16)
        np.testing.assert_allclose(direct_dft(image, trajectory, 16), 1.0 / 8, atol=1e-14)

    def test_matches_fft_on_grid(self):
        """Integer k on an n grid reproduces fft_centered."""
        f = np.arange(8) - 4
        trajectory = np.zeros((3, 8, 8))
        trajectory[1], trajectory[0] = np.meshgrid(f, f, indexing="ij")
        np.testing.assert_allclose(
            direct_dft(self.IMAGE, trajectory), fft_centered(self.IMAGE), atol=1e-12
        )

    def test_cost_guard(self):
        """Oversized problems are refused."""
        with pytest.raises(ParameterError):
            direct_dft(self.IMAGE, np.zeros((3, 4, 4)), max_cost=10)

    def test_square_image(self):
        """Only square images are supported."""
        with pytest.raises(ShapeError):
            direct_dft(np.ones((4, 6)), np.zeros((3, 1, 1)))


class TestAcquisition:
    """Test simulated acquisitions."""

    # pylint: disable=no-self-use

    N = 16
    PHANTOM = make_phantom(shepp_logan_spec(16))
    MAPS = make_coil_maps(16, 2)
    TRAJECTORY = make_radial_trajectory(8, 32, 32)

    def test_noiseless(self):
        """A valid dataset with the grid ratio recorded."""
        acquisition = simulate_acquisition(self.PHANTOM, self.MAPS, self.TRAJECTORY, 32)
        dataset = acquisition.dataset
        assert validate_dataset(dataset).is_valid
        assert dataset.samples.shape == (2, 8, 32)
        assert dataset.oversampling_ratio == 2.0
        assert dataset.noise_covariance is None
        assert acquisition.noise_level == 0.0

    def test_noise(self):
        """The stored covariance is the level-scaled model covariance."""
        covariance = np.array([[2.0, 0.5], [0.5, 1.0]])
        acquisition = simulate_acquisition(
            self.PHANTOM,
            self.MAPS,
            self.TRAJECTORY,
            32,
            noise=NoiseModel.from_covariance(covariance),
            snr=20.0,
            rng=np.random.default_rng(0),
            noise_scan_samples=100,
        )
        level = acquisition.noise_level
        assert level > 0
        np.testing.assert_allclose(acquisition.dataset.noise_covariance, level ** 2 * covariance)
        assert acquisition.dataset.noise_scan.shape == (2, 100)

    def test_seeded(self):
        """The same seed gives the same noise."""
        runs = [
            simulate_acquisition(
                self.PHANTOM, self.MAPS, self.TRAJECTORY, 32, snr=10.0,
                rng=np.random.default_rng(7),
            ).dataset.samples
            for _ in range(2)
        ]
        np.testing.assert_array_equal(runs[0], runs[1])

    def test_mismatched_maps(self):
        """Maps must match the phantom size."""
        with pytest.raises(ShapeError):
            simulate_acquisition(self.PHANTOM, make_coil_maps(8, 2), self.TRAJECTORY, 32)

    def test_reference_band_limited(self):
        """The reference keeps the phantom spectrum inside the acquired disk only."""
        acquisition = simulate_acquisition(self.PHANTOM, self.MAPS, self.TRAJECTORY, 32)
        cutoff = np.hypot(self.TRAJECTORY[0], self.TRAJECTORY[1]).max() * self.N / 32
        inside = kspace_radius(self.N) <= cutoff
        spectrum = fft_centered(acquisition.reference)
        assert np.abs(spectrum[~inside]).max() < 1e-12
        np.testing.assert_allclose(spectrum[inside], fft_centered(self.PHANTOM)[inside], atol=1e-12)

    def test_band_limit_constant(self):
        """A constant image has only DC and is unchanged."""
        image = np.full((self.N, self.N), 0.7 + 0j)
        np.testing.assert_allclose(band_limit(image, self.TRAJECTORY, 32), image, atol=1e-12)
