"""Image comparison: quantile normalization, cropping, NRMSE, SSIM."""
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np
from skimage.metrics import structural_similarity

from src.errors import MetricError, ShapeError

SSIM_SIGMA = 1.5
SSIM_MIN_SIZE = 11


@dataclass
class ComparisonReport:
    """Metrics of one image against a reference."""

    nrmse: float
    ssim: float
    diff_map: np.ndarray
    mask_used: np.ndarray
    normalization_quantile: float

    def summary(self) -> Dict[str, Any]:
        return {
            "nrmse": self.nrmse,
            "ssim": self.ssim,
            "max_abs_diff": float(np.abs(self.diff_map).max(initial=0.0)),
            "mask_pixels": int(self.mask_used.sum()),
            "normalization_quantile": self.normalization_quantile,
            "shape": list(self.diff_map.shape),
        }


def quantile_normalize(image: np.ndarray, q: float = 0.95) -> np.ndarray:
    """Divide by the q-quantile of |image|."""
    image = np.asarray(image)
    if image.size == 0:
        raise MetricError("cannot normalize an empty image")
    level = float(np.quantile(np.abs(image), q))
    if level == 0:
        raise MetricError(f"{q}-quantile of the image magnitude is zero")
    return image / level


def symmetric_crop(
    x: np.ndarray, ref: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """Crop the larger image symmetrically about its center to the other's shape."""
    if x.shape == ref.shape:
        return x, ref
    larger_x = all(a >= b for a, b in zip(x.shape, ref.shape))
    larger_ref = all(a <= b for a, b in zip(x.shape, ref.shape))
    odd = any((a - b) % 2 for a, b in zip(x.shape, ref.shape))
    if x.ndim != ref.ndim or odd or not (larger_x or larger_ref):
        raise ShapeError(
            f"cannot crop shapes {x.shape} and {ref.shape} symmetrically to a common size"
        )
    target = tuple(min(a, b) for a, b in zip(x.shape, ref.shape))

    def crop(a: np.ndarray) -> np.ndarray:
        index = tuple(slice((s - t) // 2, (s - t) // 2 + t) for s, t in zip(a.shape, target))
        return a[index]

    return crop(x), crop(ref)


def _masked(x: np.ndarray, ref: np.ndarray, mask: Optional[np.ndarray]) -> np.ndarray:
    if x.shape != ref.shape:
        raise ShapeError(f"image shapes differ: {x.shape} vs {ref.shape}")
    if mask is None:
        return np.ones(x.shape, dtype=bool)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != x.shape:
        raise ShapeError(f"mask {mask.shape} does not match images {x.shape}")
    if not mask.any():
        raise MetricError("mask is empty")
    return mask


def nrmse(x: np.ndarray, ref: np.ndarray, mask: Optional[np.ndarray] = None) -> float:
    """sqrt(mean (|x| - |ref|)^2) / mean |ref| over the mask."""
    mask = _masked(x, ref, mask)
    a, b = np.abs(x)[mask], np.abs(ref)[mask]
    mean_ref = b.mean()
    if mean_ref == 0:
        raise MetricError("reference has zero mean on the mask")
    return float(np.sqrt(np.mean((a - b) ** 2)) / mean_ref)


def ssim(
    x: np.ndarray,
    ref: np.ndarray,
    mask: Optional[np.ndarray] = None,
    data_range: float = 1.0,
) -> float:
    """Mean local SSIM of the magnitudes over the mask (Gaussian window, sigma 1.5)."""
    mask = _masked(x, ref, mask)
    if min(x.shape) < SSIM_MIN_SIZE:
        raise MetricError(f"image {x.shape} is smaller than the {SSIM_MIN_SIZE}x{SSIM_MIN_SIZE} window")
    _, local = structural_similarity(
        np.abs(ref).astype(np.float64),
        np.abs(x).astype(np.float64),
        gaussian_weights=True,
        sigma=SSIM_SIGMA,
        use_sample_covariance=False,
        data_range=data_range,
        full=True,
    )
    return float(local[mask].mean())


def diff_map(x: np.ndarray, ref: np.ndarray, q: float = 0.95) -> np.ndarray:
    """|normalized x| - |normalized ref| after symmetric cropping."""
    x, ref = symmetric_crop(np.asarray(x), np.asarray(ref))
    return np.abs(quantile_normalize(x, q)) - np.abs(quantile_normalize(ref, q))


def compare_images(
    x: np.ndarray,
    ref: np.ndarray,
    mask: Optional[np.ndarray] = None,
    q: float = 0.95,
) -> ComparisonReport:
    """Crop, normalize and compare x against ref.

    Args:
        x: test image.
        ref: reference image.
        mask: boolean mask on the cropped shape; whole image if None.
        q: normalization quantile.

    Returns:
        ComparisonReport.
    """
    x, ref = symmetric_crop(np.asarray(x), np.asarray(ref))
    nx, nref = quantile_normalize(x, q), quantile_normalize(ref, q)
    mask = _masked(nx, nref, mask)
    return ComparisonReport(
        nrmse=nrmse(nx, nref, mask),
        ssim=ssim(nx, nref, mask),
        diff_map=np.abs(nx) - np.abs(nref),
        mask_used=mask,
        normalization_quantile=q,
    )
