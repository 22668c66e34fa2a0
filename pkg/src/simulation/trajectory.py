"""Radial and spiral trajectories in oversampled-grid cells, shape [3, spoke, read]."""
import numpy as np

from src.errors import ParameterError


def make_radial_trajectory(
    n_spokes: int, n_read: int, grid_size: int, alternate: bool = False
) -> np.ndarray:
    """Spokes at angles pi * s / n_spokes through the center.

    Args:
        n_spokes: number of projections.
        n_read: samples per spoke, even.
        grid_size: oversampled grid size; radii span -grid/2 .. grid/2 - step.
        alternate: reverse the readout direction of every odd spoke.

    Returns:
        Trajectory [3, n_spokes, n_read] with zero z row.
    """
    if n_read % 2:
        raise ParameterError(f"n_read must be even, got {n_read}")
    if n_spokes < 1:
        raise ParameterError(f"n_spokes must be >= 1, got {n_spokes}")
    step = grid_size / n_read
    radius = (np.arange(n_read) - n_read // 2) * step
    angle = np.pi * np.arange(n_spokes) / n_spokes
    trajectory = np.zeros((3, n_spokes, n_read))
    trajectory[0] = np.cos(angle)[:, None] * radius
    trajectory[1] = np.sin(angle)[:, None] * radius
    if alternate:
        trajectory[:, 1::2] = trajectory[:, 1::2, ::-1]
    return trajectory


def make_spiral_trajectory(
    n_interleaves: int, n_read: int, grid_size: int, turns: float = 8.0
) -> np.ndarray:
    """Archimedean spiral interleaves from DC out to radius grid_size / 2.

    Args:
        n_interleaves: rotated copies of the spiral arm.
        n_read: samples per arm.
        grid_size: oversampled grid size.
        turns: revolutions of one arm.

    Returns:
        Trajectory [3, n_interleaves, n_read].
    """
    if n_interleaves < 1 or n_read < 2:
        raise ParameterError("spiral needs >= 1 interleave and >= 2 samples")
    t = np.arange(n_read) / n_read
    radius = 0.5 * grid_size * t
    trajectory = np.zeros((3, n_interleaves, n_read))
    for arm in range(n_interleaves):
        angle = 2.0 * np.pi * (turns * t + arm / n_interleaves)
        trajectory[0, arm] = radius * np.cos(angle)
        trajectory[1, arm] = radius * np.sin(angle)
    return trajectory
