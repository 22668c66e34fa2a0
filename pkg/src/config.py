import os
import warnings
from typing import Any, Dict, Optional

import yaml
from yacs.config import CfgNode as CN

from src.data import UNDERSAMPLING_SCHEMES
from src.dcf import DCF_METHODS
from src.errors import ConfigError, InputFileError
from src.kspace_filter import CUTOFF_UNITS, FILTER_KINDS
from src.nufft.kernel import LOOKUP_MODES
from src.utils.common import read_yaml

_C = CN()

# Base config files, relative to the including file
_C.base = []

# -----------------------------------------------------------------------------
# Solver settings
# -----------------------------------------------------------------------------
# Fixed number of CG iterations
_C.max_iterations = 10
# Tikhonov weight, 0 disables regularization
_C.tikhonov_lambda = 0.0
# Early stop when delta < epsilon, 0 disables
_C.tolerance_epsilon = 0.0
# Keep the intensity-corrected image of every iteration
_C.save_intermediate = False

# -----------------------------------------------------------------------------
# Gridding settings
# -----------------------------------------------------------------------------
_C.kernel_width = 5
_C.kernel_table_points = 10000
# "linear" or "nearest" table lookup
_C.kernel_lookup = "linear"
# Kaiser-Bessel shape, derived from width and ratio when None
_C.kernel_beta = None
# Grid / matrix size ratio; taken from the data or 2 when None
_C.oversampling_ratio_override = None
# "grid" (oversampled-grid cells) or "fov" (cycles per target FOV)
_C.trajectory_units = "grid"
# "gridded_ones", "ramp" or "none"
_C.dcf = "gridded_ones"

# -----------------------------------------------------------------------------
# Coil settings
# -----------------------------------------------------------------------------
# Hanning taper width in grid cells for sum-of-squares maps
_C.sensitivity_window_width = 50
# Support mask threshold relative to max SoS
_C.sensitivity_threshold = 0.1
# Whiten with the stored noise covariance or noise scan when present
_C.prewhiten = True

# -----------------------------------------------------------------------------
# Undersampling series
# -----------------------------------------------------------------------------
_C.undersampling = CN()
# "skip" (every r-th spoke) or "first" (first p spokes)
_C.undersampling.scheme = "skip"
_C.undersampling.factors = [1]

# -----------------------------------------------------------------------------
# k-space filter applied to the final image
# -----------------------------------------------------------------------------
_C.filter = CN()
# "hard_circle", "arctan" or "none"
_C.filter.kind = "hard_circle"
# Cutoff, support radius of the data when None
_C.filter.k_c = None
# "cycles" of the n x n k-space or "normalized", a fraction of n
_C.filter.k_c_unit = "cycles"
_C.filter.beta = 100.0

# -----------------------------------------------------------------------------
# Container entry names
# -----------------------------------------------------------------------------
_C.dataset_keys = CN()
_C.dataset_keys.rawdata = "rawdata"
_C.dataset_keys.trajectory = "trajectory"
_C.dataset_keys.sensitivities = "sensitivities"
_C.dataset_keys.noise_covariance = "noise_covariance"
_C.dataset_keys.noise_scan = "noise_scan"

# -----------------------------------------------------------------------------
# Output and misc
# -----------------------------------------------------------------------------
_C.output = CN()
_C.output.dir = os.path.join("exp", "latest")
# Also write <stem>_phase.png
_C.output.phase = False
# Coil-parallel workers, 0 uses all cores
_C.threads = 0
_C.seed = 0

_C.wandb = CN()
_C.wandb.enabled = False
_C.wandb.project = "cgsense"
_C.wandb.name = ""

TRAJECTORY_UNITS = ("grid", "fov")


def get_default_config() -> CN:
    """Get a yacs CfgNode object with default values."""
    # Return a clone so that the defaults will not be altered
    return _C.clone()


def _known_entries(raw: Dict[str, Any], defaults: CN, prefix: str = "") -> Dict[str, Any]:
    """Drop unknown keys with a warning and coerce ints given for float entries."""
    known = {}
    for key, value in raw.items():
        full_key = f"{prefix}{key}"
        if key not in defaults:
            warnings.warn(f"unknown config key '{full_key}' ignored", UserWarning)
            continue
        default = defaults[key]
        if isinstance(default, CN):
            if not isinstance(value, dict):
                raise ConfigError(f"config entry '{full_key}' must be a mapping")
            known[key] = _known_entries(value, default, prefix=f"{full_key}.")
        elif isinstance(default, float) and isinstance(value, int) and not isinstance(value, bool):
            known[key] = float(value)
        else:
            known[key] = value
    return known


def _load(config: CN, path: str) -> None:
    try:
        raw = read_yaml(path)
    except yaml.YAMLError as e:
        raise ConfigError(f"cannot parse config '{path}': {e}") from e
    except OSError as e:
        raise InputFileError(path, e.strerror or str(e)) from e
    if not isinstance(raw, dict):
        raise ConfigError(f"config '{path}' must hold a mapping, got {type(raw).__name__}")

    for base in raw.get("base") or []:
        _load(config, os.path.join(os.path.dirname(path), base))
    raw = {k: v for k, v in raw.items() if k != "base"}
    try:
        config.merge_from_other_cfg(CN(_known_entries(raw, config)))
    except (ValueError, KeyError, TypeError) as e:
        raise ConfigError(f"invalid value in config '{path}': {e}") from e


def validate_config(config: CN) -> None:
    """Raise ConfigError on the first invalid entry."""
    checks = [
        (config.max_iterations >= 1, f"max_iterations must be >= 1, got {config.max_iterations}"),
        (config.tikhonov_lambda >= 0, f"tikhonov_lambda must be >= 0, got {config.tikhonov_lambda}"),
        (config.tolerance_epsilon >= 0, f"tolerance_epsilon must be >= 0, got {config.tolerance_epsilon}"),
        (config.kernel_width >= 2, f"kernel_width must be >= 2, got {config.kernel_width}"),
        (
            config.kernel_table_points >= 100,
            f"kernel_table_points must be >= 100, got {config.kernel_table_points}",
        ),
        (
            config.sensitivity_window_width >= 1,
            f"sensitivity_window_width must be >= 1, got {config.sensitivity_window_width}",
        ),
        (
            config.oversampling_ratio_override is None or config.oversampling_ratio_override > 1,
            f"oversampling_ratio_override must exceed 1, got {config.oversampling_ratio_override}",
        ),
        (config.kernel_lookup in LOOKUP_MODES, f"unknown kernel_lookup '{config.kernel_lookup}'"),
        (config.dcf in DCF_METHODS, f"unknown dcf '{config.dcf}'"),
        (
            config.trajectory_units in TRAJECTORY_UNITS,
            f"unknown trajectory_units '{config.trajectory_units}'",
        ),
        (
            config.undersampling.scheme in UNDERSAMPLING_SCHEMES,
            f"unknown undersampling scheme '{config.undersampling.scheme}'",
        ),
        (
            len(config.undersampling.factors) > 0
            and all(int(v) >= 1 for v in config.undersampling.factors),
            f"undersampling factors must be >= 1, got {config.undersampling.factors}",
        ),
        (config.filter.kind in FILTER_KINDS, f"unknown filter kind '{config.filter.kind}'"),
        (config.filter.k_c_unit in CUTOFF_UNITS, f"unknown k_c_unit '{config.filter.k_c_unit}'"),
        (config.filter.k_c is None or config.filter.k_c > 0, "filter k_c must be positive"),
        (config.filter.beta > 0, f"filter beta must be positive, got {config.filter.beta}"),
    ]
    for ok, message in checks:
        if not ok:
            raise ConfigError(message)


def read_config(path: Optional[str] = None) -> CN:
    """Load a YAML/JSON run config on top of the defaults.

    Args:
        path: config file; defaults only if None.

    Returns:
        Validated, frozen CfgNode.
    """
    config = get_default_config()
    if path:
        _load(config, path)
    validate_config(config)
    config.freeze()
    return config


def update_config(config: CN, **overrides: Any) -> CN:
    """Apply dotted-key overrides (e.g. ``output__dir``) skipping None values."""
    config = config.clone()
    config.defrost()
    for key, value in overrides.items():
        if value is None:
            continue
        node = config
        *parents, leaf = key.split("__")
        for parent in parents:
            node = node[parent]
        if isinstance(node[leaf], float) and isinstance(value, int):
            value = float(value)
        node[leaf] = value
    validate_config(config)
    config.freeze()
    return config
