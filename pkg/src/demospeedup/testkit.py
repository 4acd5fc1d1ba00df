"""Synthetic demonstrations with known entropy structure.

A noise profile plants per-segment action noise scales onto a piecewise
linear base path. The generated trajectory is the noisy path; the paired
sampler draws chunks around the demonstrated actions at the planted
scale, so the pooled per-frame samples at frame t are Gaussian with
scale sigma_t and the true differential entropy is known in closed form:

    H(sigma, D) = D * 0.5 * ln(2 * pi * e * sigma^2)

Ground truth precision regions follow the planted scales (a segment is
precision when its sigma is at most half the largest segment sigma) and
depend only on the profile, never on the seed.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._fsio import atomic_write_text
from .model import Dataset, Trajectory
from .samplers import SyntheticSampler
from .segmenter import PrecisionLabeling


@dataclass
class NoiseProfile:
    """Plan for one synthetic trajectory.

    segments are (start, end, sigma) with inclusive 1-based frame ranges
    that must partition 1..n_frames in order. control_points are the
    waypoints of the base action path, spaced evenly over the
    trajectory; the default is a straight line from 0 to 1 per
    dimension.
    """

    n_frames: int
    action_dim: int
    segments: tuple[tuple[int, int, float], ...]
    control_points: tuple[tuple[float, ...], ...] = ()
    seed: int = 0
    trajectory_id: str = "traj0"
    frequency_hz: float = 50.0

    def __post_init__(self) -> None:
        if self.n_frames < 1:
            raise ValueError(f"n_frames must be >= 1, got {self.n_frames}")
        if self.action_dim < 1:
            raise ValueError(f"action_dim must be >= 1, got {self.action_dim}")
        expect = 1
        for start, end, sigma in self.segments:
            if start != expect or end < start:
                raise ValueError(f"segments must partition 1..{self.n_frames} in order")
            if sigma <= 0:
                raise ValueError(f"segment sigma must be positive, got {sigma}")
            expect = end + 1
        if expect != self.n_frames + 1:
            raise ValueError(f"segments must cover 1..{self.n_frames}")
        if not self.control_points:
            self.control_points = (
                tuple(0.0 for _ in range(self.action_dim)),
                tuple(1.0 for _ in range(self.action_dim)),
            )
        for point in self.control_points:
            if len(point) != self.action_dim:
                raise ValueError("control points must match action_dim")
        if len(self.control_points) < 2:
            raise ValueError("need at least 2 control points")


@dataclass
class GroundTruth:
    """Planted labeling and the analytic entropy curve, in nats."""

    labeling: PrecisionLabeling
    entropy: np.ndarray


def analytic_gaussian_entropy(sigma: float, dim: int = 1) -> float:
    """Differential entropy of an isotropic Gaussian with scale sigma."""
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    return dim * 0.5 * math.log(2.0 * math.pi * math.e * sigma * sigma)


def sigma_curve(profile: NoiseProfile) -> np.ndarray:
    sigma = np.empty(profile.n_frames)
    for start, end, value in profile.segments:
        sigma[start - 1 : end] = value
    return sigma


def base_path(profile: NoiseProfile) -> np.ndarray:
    """Piecewise-linear interpolation of the control points over 1..T."""
    points = np.asarray(profile.control_points, dtype=np.float64)
    if profile.n_frames == 1:
        return points[:1].copy()
    pos = np.linspace(0.0, points.shape[0] - 1.0, profile.n_frames)
    path = np.empty((profile.n_frames, profile.action_dim))
    for d in range(profile.action_dim):
        path[:, d] = np.interp(pos, np.arange(points.shape[0]), points[:, d])
    return path


def planted_labeling(profile: NoiseProfile) -> PrecisionLabeling:
    threshold = 0.5 * max(sigma for _, _, sigma in profile.segments)
    mask = np.zeros(profile.n_frames, dtype=bool)
    for start, end, sigma in profile.segments:
        if sigma <= threshold:
            mask[start - 1 : end] = True
    return PrecisionLabeling.from_mask(profile.trajectory_id, mask)


def generate(profile: NoiseProfile) -> tuple[Trajectory, SyntheticSampler, GroundTruth]:
    """Materialize a profile: noisy trajectory, matched sampler, ground truth."""
    sigma = sigma_curve(profile)
    rng = np.random.default_rng(profile.seed)
    actions = base_path(profile) + sigma[:, None] * rng.standard_normal(
        (profile.n_frames, profile.action_dim)
    )
    traj = Trajectory(profile.trajectory_id, actions, profile.frequency_hz)
    # the sampler is centered on the demonstrated (stored) actions
    sampler = SyntheticSampler(
        {profile.trajectory_id: traj.actions.astype(np.float64)},
        {profile.trajectory_id: sigma},
    )
    entropy = np.array(
        [analytic_gaussian_entropy(s, profile.action_dim) for s in sigma]
    )
    return traj, sampler, GroundTruth(planted_labeling(profile), entropy)


def generate_dataset(
    profiles: list[NoiseProfile],
) -> tuple[Dataset, SyntheticSampler, dict[str, GroundTruth]]:
    """Bundle several profiles into one dataset with a combined sampler."""
    if not profiles:
        raise ValueError("need at least one profile")
    dims = {p.action_dim for p in profiles}
    freqs = {p.frequency_hz for p in profiles}
    if len(dims) != 1 or len(freqs) != 1:
        raise ValueError("profiles must share action_dim and frequency_hz")
    trajectories = []
    means: dict[str, np.ndarray] = {}
    sigmas: dict[str, np.ndarray] = {}
    truths: dict[str, GroundTruth] = {}
    for profile in profiles:
        traj, sampler, truth = generate(profile)
        trajectories.append(traj)
        means.update(sampler.means)
        sigmas.update(sampler.sigmas)
        truths[profile.trajectory_id] = truth
    dataset = Dataset(trajectories, dims.pop(), freqs.pop())
    return dataset, SyntheticSampler(means, sigmas), truths


def brute_force_awe(actions: np.ndarray, entropy: np.ndarray, epsilon: float) -> list[int]:
    """Exhaustive minimal waypoint search, for cross-checking small cases.

    Enumerates interior waypoint subsets in order of size then
    lexicographic sequence, so the first feasible hit is the unique
    expected answer. Limited to 15 frames.
    """
    actions = np.asarray(actions, dtype=np.float64)
    entropy = np.asarray(entropy, dtype=np.float64)
    n_frames = actions.shape[0]
    if n_frames > 15:
        raise ValueError(f"brute force capped at 15 frames, got {n_frames}")
    if n_frames <= 2:
        return list(range(1, n_frames + 1))
    sd = float(np.std(entropy))
    z = np.zeros_like(entropy) if sd == 0.0 else (entropy - entropy.mean()) / sd
    weights = 1.0 + np.maximum(0.0, -z)

    def segment_ok(i: int, j: int) -> bool:
        for t in range(i + 1, j):
            frac = (t - i) / (j - i)
            pred = actions[i - 1] + frac * (actions[j - 1] - actions[i - 1])
            dev = math.sqrt(float(np.sum((actions[t - 1] - pred) ** 2)))
            if weights[t - 1] * dev > epsilon:
                return False
        return True

    interior = range(2, n_frames)
    for count in range(0, n_frames - 1):
        for subset in itertools.combinations(interior, count):
            waypoints = [1, *subset, n_frames]
            if all(segment_ok(a, b) for a, b in zip(waypoints, waypoints[1:])):
                return waypoints
    return list(range(1, n_frames + 1))


def profile_from_dict(raw: dict, default_id: str = "traj0") -> NoiseProfile:
    return NoiseProfile(
        n_frames=int(raw["n_frames"]),
        action_dim=int(raw["action_dim"]),
        segments=tuple((int(s), int(e), float(sig)) for s, e, sig in raw["segments"]),
        control_points=tuple(tuple(float(x) for x in p) for p in raw.get("control_points", [])),
        seed=int(raw.get("seed", 0)),
        trajectory_id=str(raw.get("id", default_id)),
        frequency_hz=float(raw.get("frequency_hz", 50.0)),
    )


def read_profile(path: Path | str) -> NoiseProfile:
    return profile_from_dict(json.loads(Path(path).read_text("utf-8")))


def write_ground_truth(
    truths: dict[str, GroundTruth],
    profiles: list[NoiseProfile],
    path: Path | str,
) -> None:
    """Persist planted labels and noise segments next to a generated dataset.

    The segments double as the synthetic sampler's configuration, so a
    generated dataset can be re-estimated later without the profile.
    """
    payload = {
        "version": 1,
        "trajectories": [
            {
                "id": p.trajectory_id,
                "segments": [[s, e, sig] for s, e, sig in p.segments],
                "precision": [[s, e - 1] for s, e in truths[p.trajectory_id].labeling.precision_runs],
            }
            for p in profiles
        ],
    }
    atomic_write_text(Path(path), json.dumps(payload, indent=2) + "\n")


def sampler_from_ground_truth(dataset: Dataset, path: Path | str) -> SyntheticSampler:
    """Rebuild the matched sampler for a generated dataset directory."""
    raw = json.loads(Path(path).read_text("utf-8"))
    means: dict[str, np.ndarray] = {}
    sigmas: dict[str, np.ndarray] = {}
    for entry in raw["trajectories"]:
        traj = dataset.by_id(str(entry["id"]))
        sigma = np.empty(traj.n_frames)
        for start, end, value in entry["segments"]:
            sigma[start - 1 : end] = value
        means[traj.trajectory_id] = traj.actions.astype(np.float64)
        sigmas[traj.trajectory_id] = sigma
    return SyntheticSampler(means, sigmas)


def ground_truth_labelings(path: Path | str) -> dict[str, PrecisionLabeling]:
    raw = json.loads(Path(path).read_text("utf-8"))
    out: dict[str, PrecisionLabeling] = {}
    for entry in raw["trajectories"]:
        n_frames = max(e for _, e, _ in entry["segments"])
        mask = np.zeros(n_frames, dtype=bool)
        for start, end in entry["precision"]:
            mask[start - 1 : end] = True
        out[str(entry["id"])] = PrecisionLabeling.from_mask(str(entry["id"]), mask)
    return out
