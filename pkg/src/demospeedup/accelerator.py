"""Entropy-guided piecewise downsampling and baseline index generators.

The downsample path from frame i advances by r_high only when the whole
inclusive window {i, ..., i+r_high} is casualness; otherwise it advances
by r_low. Frames past the end of the trajectory are never casualness,
so windows crossing the end fall back to r_low, and generation stops
once the next index would exceed T.

Acceleration replicates before downsampling: every source frame t
becomes one training sample whose action chunk follows the downsample
path starting at t, truncated to the accelerated chunk length and
tail-padded with the final action. The observation for the sample is
the one at t, so each (o_t, chunk) pair keeps its original context.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._fsio import atomic_write_text
from .entropy import EntropySeries
from .model import ContactEvent, Dataset, Trajectory, write_dataset
from .segmenter import PrecisionLabeling

METHODS = ("demospeedup", "constant", "awe", "contact")


def parse_method(spec: str) -> tuple[str, float | None]:
    """Split a method spec like "constant:3" into (name, parameter)."""
    name, _, arg = spec.partition(":")
    if name not in METHODS:
        raise ValueError(f"unknown method {name!r}, expected one of {METHODS}")
    if name == "demospeedup":
        if arg:
            raise ValueError("method demospeedup takes no parameter")
        return name, None
    if not arg:
        raise ValueError(f"method {name!r} needs a parameter, e.g. {name}:2")
    value = float(arg)
    if name in ("constant", "contact") and (value != int(value) or value < (1 if name == "constant" else 0)):
        raise ValueError(f"method {name!r} needs a non-negative integer parameter")
    return name, value


@dataclass
class AccelerationConfig:
    r_low: int = 2
    r_high: int = 4
    chunk_len: int = 8
    method: str = "demospeedup"

    def __post_init__(self) -> None:
        if not 1 <= self.r_low <= self.r_high:
            raise ValueError(f"need 1 <= r_low <= r_high, got ({self.r_low}, {self.r_high})")
        if self.chunk_len < 1:
            raise ValueError(f"chunk_len must be >= 1, got {self.chunk_len}")
        parse_method(self.method)


@dataclass
class AcceleratedSample:
    """One training pair: observation frame t plus its downsampled chunk."""

    trajectory_id: str
    t: int
    source_indices: tuple[int, ...]
    actions: np.ndarray


@dataclass
class AcceleratedDataset:
    samples: dict[str, list[AcceleratedSample]]
    config: AccelerationConfig
    labeling_hash: str


@dataclass
class TrajectorySpeedup:
    trajectory_id: str
    n_frames: int
    path_length: int
    ratio: float


@dataclass
class SpeedupStats:
    per_trajectory: list[TrajectorySpeedup] = field(default_factory=list)

    @property
    def mean_ratio(self) -> float:
        return float(np.mean([row.ratio for row in self.per_trajectory]))

    @property
    def min_ratio(self) -> float:
        return float(min(row.ratio for row in self.per_trajectory))

    @property
    def max_ratio(self) -> float:
        return float(max(row.ratio for row in self.per_trajectory))


def piecewise_indices(
    t: int, n_frames: int, labeling: PrecisionLabeling, r_low: int, r_high: int
) -> list[int]:
    """Downsample path after frame t; excludes t itself."""
    if not 1 <= t <= n_frames:
        raise ValueError(f"frame {t} outside [1, {n_frames}]")
    if not 1 <= r_low <= r_high:
        raise ValueError(f"need 1 <= r_low <= r_high, got ({r_low}, {r_high})")
    casual = labeling.casual_mask()
    out: list[int] = []
    i = t
    while True:
        hi = i + r_high
        if hi <= n_frames and bool(casual[i - 1 : hi].all()):
            step = r_high
        else:
            step = r_low
        nxt = i + step
        if nxt > n_frames:
            break
        out.append(nxt)
        i = nxt
    return out


def constant_indices(t: int, n_frames: int, r: int) -> list[int]:
    """Uniform stride downsampling; equals the piecewise path when r_low == r_high == r."""
    if not 1 <= t <= n_frames:
        raise ValueError(f"frame {t} outside [1, {n_frames}]")
    if r < 1:
        raise ValueError(f"stride must be >= 1, got {r}")
    return list(range(t + r, n_frames + 1, r))


def _entropy_weights(entropy: np.ndarray) -> np.ndarray:
    sd = float(np.std(entropy))  # population convention, as in normalization
    z = np.zeros_like(entropy) if sd == 0.0 else (entropy - entropy.mean()) / sd
    return 1.0 + np.maximum(0.0, -z)


def awe_star_indices(actions: np.ndarray, entropy: np.ndarray, epsilon: float) -> list[int]:
    """Minimal waypoint set under an entropy-weighted linear-interpolation error.

    A waypoint pair (i, j) is feasible when every intermediate frame t
    satisfies w_t * ||a_t - lerp(a_i, a_j, t)||_2 <= epsilon, with
    w_t = 1 + max(0, -z_t) and z the z-scored entropy, so low-entropy
    frames tolerate less deviation. Returns the lexicographically
    smallest of the minimum-cardinality waypoint sequences; both
    endpoints are always kept. epsilon -> 0 degenerates to all frames.
    """
    actions = np.asarray(actions, dtype=np.float64)
    entropy = np.asarray(entropy, dtype=np.float64)
    n_frames = actions.shape[0]
    if entropy.shape[0] != n_frames:
        raise ValueError("entropy series and actions disagree on frame count")
    if epsilon < 0:
        raise ValueError(f"epsilon must be >= 0, got {epsilon}")
    if n_frames <= 2:
        return list(range(1, n_frames + 1))
    weights = _entropy_weights(entropy)

    def feasible(i: int, j: int) -> bool:
        if j - i == 1:
            return True
        ts = np.arange(i + 1, j)
        alpha = (ts - i) / (j - i)
        pred = actions[i - 1] + alpha[:, None] * (actions[j - 1] - actions[i - 1])
        dev = np.linalg.norm(actions[ts - 1] - pred, axis=1)
        return bool(np.max(weights[ts - 1] * dev) <= epsilon)

    feas = np.zeros((n_frames + 1, n_frames + 1), dtype=bool)
    for i in range(1, n_frames):
        for j in range(i + 1, n_frames + 1):
            feas[i, j] = feasible(i, j)

    # fewest edges from each frame to the end; (i, i+1) keeps this finite
    need = np.full(n_frames + 1, np.inf)
    need[n_frames] = 0
    for i in range(n_frames - 1, 0, -1):
        js = np.nonzero(feas[i, i + 1 :])[0] + i + 1
        need[i] = 1 + np.min(need[js])

    path = [1]
    cur = 1
    while cur != n_frames:
        for j in range(cur + 1, n_frames + 1):
            if feas[cur, j] and need[j] == need[cur] - 1:
                path.append(j)
                cur = j
                break
    return path


def contact_labeling(
    events: list[ContactEvent], n_frames: int, window: int, trajectory_id: str
) -> PrecisionLabeling:
    """Frames within `window` of any contact event are precision."""
    if window < 0:
        raise ValueError(f"window must be >= 0, got {window}")
    mask = np.zeros(n_frames, dtype=bool)
    for event in events:
        lo = max(1, event.t - window)
        hi = min(n_frames, event.t + window)
        mask[lo - 1 : hi] = True
    return PrecisionLabeling.from_mask(trajectory_id, mask)


def recommended_chunk(chunk_len: int, speedup: float) -> int:
    """Shrink the policy chunk with the measured speedup (half-up rounding)."""
    if chunk_len < 1:
        raise ValueError(f"chunk_len must be >= 1, got {chunk_len}")
    if speedup <= 0:
        raise ValueError(f"speedup must be positive, got {speedup}")
    return max(1, math.floor(chunk_len / speedup + 0.5))


def _labeling_hash(labelings: dict[str, PrecisionLabeling]) -> str:
    canon = {
        tid: [[s, e - 1] for s, e in lab.precision_runs]
        for tid, lab in sorted(labelings.items())
    }
    return hashlib.sha256(json.dumps(canon, sort_keys=True).encode("utf-8")).hexdigest()


def _path_fn(
    traj: Trajectory,
    cfg: AccelerationConfig,
    labelings: dict[str, PrecisionLabeling] | None,
    entropies: dict[str, EntropySeries] | None,
    contacts: dict[str, list[ContactEvent]] | None,
):
    """Per-frame source-index generator for the configured method."""
    name, arg = parse_method(cfg.method)
    n_frames = traj.n_frames
    tid = traj.trajectory_id
    if name == "constant":
        stride = int(arg)
        return lambda t: constant_indices(t, n_frames, stride)
    if name == "awe":
        if entropies is None or tid not in entropies:
            raise ValueError(f"method awe needs an entropy series for {tid}")
        waypoints = awe_star_indices(
            traj.actions.astype(np.float64), entropies[tid].values, float(arg)
        )
        return lambda t: [w for w in waypoints if w > t]
    if name == "contact":
        events = (contacts or {}).get(tid, [])
        labeling = contact_labeling(events, n_frames, int(arg), tid)
    else:
        if labelings is None or tid not in labelings:
            raise ValueError(f"method demospeedup needs a precision labeling for {tid}")
        labeling = labelings[tid]
    return lambda t: piecewise_indices(t, n_frames, labeling, cfg.r_low, cfg.r_high)


def accelerate_dataset(
    dataset: Dataset,
    cfg: AccelerationConfig,
    labelings: dict[str, PrecisionLabeling] | None = None,
    entropies: dict[str, EntropySeries] | None = None,
    contacts: dict[str, list[ContactEvent]] | None = None,
) -> AcceleratedDataset:
    """Build one accelerated training sample per source frame."""
    samples: dict[str, list[AcceleratedSample]] = {}
    for traj in dataset.trajectories:
        path_at = _path_fn(traj, cfg, labelings, entropies, contacts)
        rows: list[AcceleratedSample] = []
        for t in range(1, traj.n_frames + 1):
            indices = path_at(t)[: cfg.chunk_len]
            indices += [traj.n_frames] * (cfg.chunk_len - len(indices))
            chunk = traj.actions[np.asarray(indices, dtype=np.intp) - 1].copy()
            rows.append(AcceleratedSample(traj.trajectory_id, t, tuple(indices), chunk))
        samples[traj.trajectory_id] = rows
    return AcceleratedDataset(samples, cfg, _labeling_hash(labelings or {}))


def speedup_stats(
    dataset: Dataset,
    cfg: AccelerationConfig,
    labelings: dict[str, PrecisionLabeling] | None = None,
    entropies: dict[str, EntropySeries] | None = None,
    contacts: dict[str, list[ContactEvent]] | None = None,
) -> SpeedupStats:
    """Replay-length accounting for the downsample path from frame 1.

    The path visits L = 1 + |indices| frames. The speedup ratio compares
    transitions, (T-1)/(L-1): a trajectory downsampled at a uniform
    stride r has exactly r times fewer transitions whenever r divides
    T-1. Degenerate single-frame paths report 1.0.
    """
    stats = SpeedupStats()
    for traj in dataset.trajectories:
        path_at = _path_fn(traj, cfg, labelings, entropies, contacts)
        length = 1 + len(path_at(1))
        if traj.n_frames > 1 and length > 1:
            ratio = (traj.n_frames - 1) / (length - 1)
        else:
            ratio = 1.0
        stats.per_trajectory.append(
            TrajectorySpeedup(traj.trajectory_id, traj.n_frames, length, ratio)
        )
    return stats


def write_samples_jsonl(accel: AcceleratedDataset, path: Path | str) -> None:
    lines = []
    for tid in accel.samples:
        for sample in accel.samples[tid]:
            lines.append(
                json.dumps(
                    {"trajectory": tid, "t": sample.t, "indices": list(sample.source_indices)},
                    separators=(",", ":"),
                )
            )
    atomic_write_text(Path(path), "\n".join(lines) + "\n")


def write_stats_json(stats: SpeedupStats, cfg: AccelerationConfig, path: Path | str) -> None:
    payload = {
        "method": cfg.method,
        "r_low": cfg.r_low,
        "r_high": cfg.r_high,
        "chunk_len": cfg.chunk_len,
        "per_trajectory": [
            {
                "id": row.trajectory_id,
                "frames": row.n_frames,
                "path_length": row.path_length,
                "speedup": row.ratio,
            }
            for row in stats.per_trajectory
        ],
        "speedup": {
            "mean": stats.mean_ratio,
            "min": stats.min_ratio,
            "max": stats.max_ratio,
        },
    }
    atomic_write_text(Path(path), json.dumps(payload, indent=2) + "\n")


def write_accelerated_output(
    accel: AcceleratedDataset,
    source: Dataset,
    stats: SpeedupStats,
    out_dir: Path | str,
) -> None:
    """The output bundle: the source demonstrations (so samples.jsonl
    lines reconstruct (o_t, chunk) pairs exactly), samples, and stats."""
    out_dir = Path(out_dir)
    write_dataset(source, out_dir)
    write_samples_jsonl(accel, out_dir / "samples.jsonl")
    write_stats_json(stats, accel.config, out_dir / "stats.json")
