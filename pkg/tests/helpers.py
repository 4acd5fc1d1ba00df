"""Shared builders for the test suite."""

from __future__ import annotations

import numpy as np

from demospeedup.model import Dataset, Trajectory
from demospeedup.segmenter import PrecisionLabeling
from demospeedup.testkit import NoiseProfile


def line_trajectory(
    n_frames: int, dim: int = 1, tid: str = "traj0", freq: float = 50.0
) -> Trajectory:
    """Straight-line actions: frame t holds value t-1 (+d per extra dim)."""
    base = np.arange(n_frames, dtype=np.float64)
    actions = np.stack([base + d for d in range(dim)], axis=1)
    return Trajectory(tid, actions, freq)


def single_dataset(traj: Trajectory) -> Dataset:
    return Dataset([traj], traj.action_dim, traj.frequency_hz)


def two_level_profile(
    n_frames: int = 120,
    dim: int = 2,
    seed: int = 0,
    tid: str = "traj0",
    low: float = 0.01,
    high: float = 0.1,
) -> NoiseProfile:
    """High/low/high noise thirds; the middle third is the planted precision run."""
    third = n_frames // 3
    segments = (
        (1, third, high),
        (third + 1, 2 * third, low),
        (2 * third + 1, n_frames, high),
    )
    return NoiseProfile(
        n_frames=n_frames, action_dim=dim, segments=segments, seed=seed, trajectory_id=tid
    )


def labeling_iou(a: PrecisionLabeling, b: PrecisionLabeling) -> float:
    """Precision-set overlap; two empty precision sets count as perfect."""
    sa, sb = a.precision_set(), b.precision_set()
    if not sa and not sb:
        return 1.0
    return len(sa & sb) / len(sa | sb)


def blob_scatter_points(seed: int = 11) -> np.ndarray:
    """Two 50-point blobs at (-2,-2) and (+2,+2), sigma 0.1, plus 5 far
    scatter points (uniform on [-10,10]^2, redrawn while within 5.0 of a
    blob center so they cannot chain onto blob density)."""
    rng = np.random.default_rng(seed)
    blob_a = rng.normal((-2.0, -2.0), 0.1, size=(50, 2))
    blob_b = rng.normal((2.0, 2.0), 0.1, size=(50, 2))
    scatter = []
    while len(scatter) < 5:
        p = rng.uniform(-10.0, 10.0, size=2)
        near = min(
            float(np.linalg.norm(p - np.array([-2.0, -2.0]))),
            float(np.linalg.norm(p - np.array([2.0, 2.0]))),
        )
        if near >= 5.0:
            scatter.append(p)
    return np.concatenate([blob_a, blob_b, np.asarray(scatter)])
