"""k-space filter tests."""
import numpy as np
import pytest

from src.data import GridGeometry
from src.errors import ParameterError, ShapeError
from src.kspace_filter import (
    FilterSpec,
    apply_filter,
    filter_kspace,
    filter_weights,
    kspace_radius,
)
from src.nufft import fft_centered


class TestFilter:
    """Test arctan and hard-circle filters."""

    # pylint: disable=no-self-use

    GEOMETRY = GridGeometry(
        matrix_size=32, grid_size=64, oversampling_ratio=2.0, delta_k=1 / 64, k_max=28.0
    )
    IMAGE = np.random.default_rng(0).standard_normal((32, 32)) + 0j

    def test_arctan_half_at_cutoff(self):
        """The arctan filter is exactly 1/2 at |k| = k_c."""
        weights = filter_weights(FilterSpec("arctan", k_c=10.0), self.GEOMETRY)
        assert abs(weights[16, 26] - 0.5) < 1e-12
        assert abs(weights[6, 16] - 0.5) < 1e-12
        assert weights[16, 16] > 0.99
        assert weights[0, 0] < 0.01

    def test_hard_circle_zero_outside(self):
        """No energy is left beyond the cutoff."""
        spec = FilterSpec("hard_circle", k_c=10.0)
        outside = kspace_radius(32) > 10.0
        kspace = filter_kspace(self.IMAGE, spec, self.GEOMETRY)
        assert np.all(kspace[outside] == 0)
        residual = fft_centered(apply_filter(self.IMAGE, spec, self.GEOMETRY))
        assert np.abs(residual[outside]).max() < 1e-12 * np.abs(residual).max()

    def test_default_cutoff(self):
        """Without k_c the support radius of the data is used."""
        spec = FilterSpec("hard_circle")
        assert spec.cutoff(self.GEOMETRY) == pytest.approx(14.0)
        assert spec.record(self.GEOMETRY)["cutoff_cycles"] == pytest.approx(14.0)

    def test_normalized_unit(self):
        """A normalized cutoff is a fraction of the matrix size."""
        spec = FilterSpec("arctan", k_c=0.25, unit="normalized")
        assert spec.cutoff(self.GEOMETRY) == pytest.approx(8.0)

    def test_normalized_ignores_support_radius(self):
        """A normalized half is the inscribed disk of n, not half the data radius."""
        half = FilterSpec("hard_circle", k_c=0.5, unit="normalized")
        cycles = FilterSpec("hard_circle", k_c=16.0)
        assert half.cutoff(self.GEOMETRY) == pytest.approx(16.0)
        assert half.cutoff(self.GEOMETRY) != pytest.approx(0.5 * self.GEOMETRY.support_radius)
        np.testing.assert_array_equal(
            filter_weights(half, self.GEOMETRY), filter_weights(cycles, self.GEOMETRY)
        )

    def test_symmetry(self):
        """Weights are symmetric about the k-space center."""
        w = filter_weights(FilterSpec("arctan", k_c=9.5, beta=5.0), self.GEOMETRY)
        np.testing.assert_array_equal(w, w.T)
        np.testing.assert_allclose(w[1:, 1:], w[1:, 1:][::-1, ::-1], atol=1e-15)

    def test_none(self):
        """'none' returns an unchanged copy."""
        out = apply_filter(self.IMAGE, FilterSpec("none"), self.GEOMETRY)
        np.testing.assert_array_equal(out, self.IMAGE)
        assert out is not self.IMAGE

    def test_invalid(self):
        """Bad kinds, units, cutoffs and shapes are rejected."""
        with pytest.raises(ParameterError):
            FilterSpec("gaussian")
        with pytest.raises(ParameterError):
            FilterSpec(unit="pixels")
        with pytest.raises(ParameterError):
            FilterSpec(k_c=0.0)
        with pytest.raises(ParameterError):
            FilterSpec("arctan", beta=-1.0)
        with pytest.raises(ShapeError):
            filter_kspace(np.ones((16, 16)), FilterSpec(), self.GEOMETRY)
