"""HDF5 container files and image export.

On disk the k-space data follows the measured brain and heart files: rawdata is
[1, readout, spoke, coil] and trajectory is [3, readout, spoke]. In memory
both use [.., spoke, readout] with the coil (or axis) first.
"""
import os
from typing import Dict, List, Mapping, Optional, Sequence

import cv2
import h5py
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from src.data import KSpaceDataset, validate_dataset  # noqa: E402
from src.errors import (  # noqa: E402
    DataTypeError,
    InputFileError,
    MissingEntryError,
    ShapeError,
    ValidationError,
)

DEFAULT_KEYS = {
    "rawdata": "rawdata",
    "trajectory": "trajectory",
    "sensitivities": "sensitivities",
    "noise_covariance": "noise_covariance",
    "noise_scan": "noise_scan",
}
IMAGE_KEY = "image"


def _keys(keys: Optional[Mapping[str, str]]) -> Dict[str, str]:
    merged = dict(DEFAULT_KEYS)
    if keys:
        merged.update({k: v for k, v in dict(keys).items() if v})
    return merged


def _as_complex(array: np.ndarray, name: str) -> np.ndarray:
    """Accept native complex or (r, i) compound arrays."""
    if array.dtype.names:
        fields = set(array.dtype.names)
        for re_name, im_name in (("r", "i"), ("real", "imag")):
            if {re_name, im_name} <= fields:
                return array[re_name] + 1j * array[im_name]
    if not np.iscomplexobj(array):
        raise DataTypeError(f"entry '{name}' must be complex, got {array.dtype}")
    return array


def _open(path: str, mode: str = "r") -> h5py.File:
    if mode == "r" and not os.path.isfile(path):
        raise InputFileError(path, "no such file")
    try:
        return h5py.File(path, mode)
    except OSError as e:
        if mode == "r":
            raise InputFileError(path, str(e)) from e
        raise


def read_dataset(path: str, keys: Optional[Mapping[str, str]] = None) -> KSpaceDataset:
    """Read k-space data and side data into canonical order.

    Args:
        path: container file.
        keys: entry name mapping, defaults to DEFAULT_KEYS.

    Returns:
        KSpaceDataset with samples [coil, spoke, read] and trajectory [3, spoke, read].
    """
    names = _keys(keys)
    with _open(path) as f:
        for required in ("rawdata", "trajectory"):
            if names[required] not in f:
                raise MissingEntryError(names[required], path)

        raw = _as_complex(f[names["rawdata"]][()], names["rawdata"])
        if raw.ndim == 4:
            raw = raw[0]
        if raw.ndim != 3:
            raise ShapeError(f"rawdata must be [1, read, spoke, coil], got {raw.shape}")
        samples = raw.transpose(2, 1, 0)

        trajectory = np.asarray(f[names["trajectory"]][()], dtype=np.float64)
        if trajectory.ndim != 3:
            raise ShapeError(f"trajectory must be [3, read, spoke], got {trajectory.shape}")
        trajectory = trajectory.transpose(0, 2, 1)

        optional = {}
        for name in ("sensitivities", "noise_covariance", "noise_scan"):
            if names[name] in f:
                optional[name] = _as_complex(f[names[name]][()], names[name])

        whitened = bool(f.attrs.get("whitened", False))
        ratio = f.attrs.get("oversampling_ratio")

    return KSpaceDataset(
        samples=samples,
        trajectory=trajectory,
        whitened=whitened,
        oversampling_ratio=None if ratio is None else float(ratio),
        **optional,
    )


def write_dataset(
    path: str, dataset: KSpaceDataset, keys: Optional[Mapping[str, str]] = None
) -> None:
    """Write a valid dataset in the on-disk layout read by ``read_dataset``."""
    findings = validate_dataset(dataset).findings
    if findings:
        raise ValidationError(findings)
    names = _keys(keys)
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with _open(path, "w") as f:
        samples = np.asarray(dataset.samples, dtype=np.complex128)
        f.create_dataset(
            names["rawdata"],
            data=np.ascontiguousarray(samples.transpose(2, 1, 0)[None]),
            track_times=False,
        )
        trajectory = np.asarray(dataset.trajectory, dtype=np.float64)
        f.create_dataset(
            names["trajectory"],
            data=np.ascontiguousarray(trajectory.transpose(0, 2, 1)),
            track_times=False,
        )
        for name in ("sensitivities", "noise_covariance", "noise_scan"):
            value = getattr(dataset, name)
            if value is not None:
                f.create_dataset(
                    names[name],
                    data=np.ascontiguousarray(value, dtype=np.complex128),
                    track_times=False,
                )
        f.attrs["whitened"] = bool(dataset.whitened)
        if dataset.oversampling_ratio is not None:
            f.attrs["oversampling_ratio"] = float(dataset.oversampling_ratio)


def write_arrays(path: str, **arrays: np.ndarray) -> None:
    """Write named arrays to a container, e.g. ground truth or weights."""
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with _open(path, "w") as f:
        for name, value in arrays.items():
            f.create_dataset(name, data=np.ascontiguousarray(value), track_times=False)


def to_uint8(image: np.ndarray) -> np.ndarray:
    """Magnitude windowed from its minimum to its maximum; constant maps to 128."""
    magnitude = np.abs(image)
    lo, hi = float(magnitude.min()), float(magnitude.max())
    if not hi > lo:
        return np.full(magnitude.shape, 128, dtype=np.uint8)
    return np.rint((magnitude - lo) / (hi - lo) * 255.0).astype(np.uint8)


def phase_to_uint8(image: np.ndarray) -> np.ndarray:
    return np.rint((np.angle(image) + np.pi) / (2.0 * np.pi) * 255.0).astype(np.uint8)


def _imwrite(path: str, pixels: np.ndarray) -> None:
    if not cv2.imwrite(path, pixels):
        raise OSError(f"could not write image '{path}'")


def write_image_files(image: np.ndarray, path_stem: str, phase: bool = False) -> List[str]:
    """Write <stem>.h5 (full precision) plus 8-bit <stem>.png and <stem>.pgm.

    Args:
        image: complex or real [row, col] image.
        path_stem: output path without extension.
        phase: also write <stem>_phase.png.

    Returns:
        Paths written.
    """
    image = np.asarray(image)
    os.makedirs(os.path.dirname(path_stem) or ".", exist_ok=True)
    written = [path_stem + ".h5", path_stem + ".png", path_stem + ".pgm"]
    write_arrays(written[0], **{IMAGE_KEY: image})
    gray = to_uint8(image)
    _imwrite(written[1], gray)
    _imwrite(written[2], gray)
    if phase:
        written.append(path_stem + "_phase.png")
        _imwrite(written[-1], phase_to_uint8(image))
    return written


def read_image(path: str, key: Optional[str] = None) -> np.ndarray:
    """Read an image from a container (entry ``key`` or "image"), .npy or an 8-bit file."""
    if not os.path.isfile(path):
        raise InputFileError(path, "no such file")
    if path.endswith((".h5", ".hdf5")):
        with _open(path) as f:
            name = key or (IMAGE_KEY if IMAGE_KEY in f else None)
            if name is None and len(f.keys()) == 1:
                name = next(iter(f.keys()))
            if name is None or name not in f:
                raise MissingEntryError(key or IMAGE_KEY, path)
            return f[name][()]
    if path.endswith(".npy"):
        return np.load(path)
    pixels = cv2.imread(path, cv2.IMREAD_GRAYSCALE)
    if pixels is None:
        raise InputFileError(path, "not a readable image")
    return pixels.astype(np.float64)


def save_montage(
    rows: Sequence[Sequence[np.ndarray]],
    path: str,
    row_labels: Optional[Sequence[str]] = None,
    col_labels: Optional[Sequence[str]] = None,
) -> None:
    """Grid of magnitude images, each windowed min to max."""
    n_rows, n_cols = len(rows), max(len(r) for r in rows)
    fig, axes = plt.subplots(
        n_rows, n_cols, figsize=(2.5 * n_cols, 2.5 * n_rows), squeeze=False
    )
    for i, row in enumerate(rows):
        for j in range(n_cols):
            ax = axes[i][j]
            ax.axis("off")
            if j < len(row):
                ax.imshow(np.abs(row[j]), cmap="gray")
            if i == 0 and col_labels:
                ax.set_title(col_labels[j])
            if j == 0 and row_labels:
                ax.text(-0.05, 0.5, row_labels[i], transform=ax.transAxes, rotation=90,
                        ha="right", va="center")
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)


def save_residual_plot(histories: Mapping[str, Sequence[float]], path: str) -> None:
    """Semilog plot of delta per iteration, one curve per run."""
    fig, ax = plt.subplots(figsize=(5, 4))
    for label, history in histories.items():
        ax.semilogy(range(len(history)), np.maximum(history, 1e-300), marker="o", label=label)
    ax.set_xlabel("iteration")
    ax.set_ylabel("delta")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)
