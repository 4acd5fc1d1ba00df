"""Per-frame conditional action entropy from sampled chunks.

For frame t, every chunk sampled at an origin j in [t-K+1, t] contains a
prediction for time t (row t-j). Pooling those rows over origins and
samples gives M = N * (t - max(1, t-K+1) + 1) action vectors; near the
start of a trajectory fewer origins exist and M shrinks accordingly.

The pooled density is a Gaussian kernel estimate

    p(x) = 1/(M*h) * sum_m phi((x - s_m)/h),    phi the standard normal pdf,

and the per-frame entropy comes in two flavors:

    plogp          H = -sum_m p(s_m) * log p(s_m)
    resubstitution H = -1/M * sum_m log p(s_m)

plogp sums the p*log(p) terms over the pool without normalizing by M;
it is the default scoring rule here, and because segmentation consumes
z-scored entropies the two modes mostly agree on the resulting labels.
Multi-dimensional actions are scored per dimension with independent 1-D
estimates (summed), or jointly with a product kernel.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._fsio import atomic_write_text
from ._seeding import derive_seed
from .model import Trajectory
from .samplers import ProxySampler

MIN_BANDWIDTH = 1e-6
_SQRT_2PI = float(np.sqrt(2.0 * np.pi))
_EVAL_BLOCK = 512

MODES = ("plogp", "resubstitution")
DIM_MODES = ("per-dim", "joint")


class EstimationError(Exception):
    """Entropy estimation failed; message carries the offending frame."""


@dataclass
class EntropyConfig:
    """Sampling and scoring parameters for entropy estimation.

    bandwidth is either the string "silverman" (per-pool rule of thumb)
    or a fixed positive float used for every dimension.
    """

    n_samples: int = 50
    chunk_len: int = 8
    bandwidth: float | str = "silverman"
    mode: str = "plogp"
    dim_mode: str = "per-dim"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_samples < 2:
            raise ValueError(f"n_samples must be >= 2, got {self.n_samples}")
        if self.chunk_len < 1:
            raise ValueError(f"chunk_len must be >= 1, got {self.chunk_len}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.dim_mode not in DIM_MODES:
            raise ValueError(f"dim_mode must be one of {DIM_MODES}, got {self.dim_mode!r}")
        if not isinstance(self.bandwidth, str):
            if float(self.bandwidth) <= 0:
                raise ValueError(f"fixed bandwidth must be positive, got {self.bandwidth}")
        elif self.bandwidth != "silverman":
            raise ValueError(f"unknown bandwidth rule {self.bandwidth!r}")

    @property
    def mode_tag(self) -> str:
        return f"{self.mode}/{self.dim_mode}"


@dataclass
class ActionSampleSet:
    """The pooled action samples conditioning one frame: (M, D) values."""

    t: int
    samples: np.ndarray
    bandwidths: np.ndarray


@dataclass
class EntropySeries:
    """Per-frame entropy of one trajectory, in nats."""

    trajectory_id: str
    values: np.ndarray
    cleaned: np.ndarray = field(default=None)  # type: ignore[assignment]
    mode: str = ""

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.cleaned is None:
            self.cleaned = np.zeros(self.values.shape[0], dtype=bool)
        else:
            self.cleaned = np.asarray(self.cleaned, dtype=bool)
        if self.cleaned.shape != self.values.shape:
            raise ValueError("cleaned flags must match values length")

    @property
    def n_frames(self) -> int:
        return int(self.values.shape[0])


def silverman_bandwidth(values: np.ndarray) -> float:
    """Rule-of-thumb kernel width: 0.9 * min(std, IQR/1.34) * n^(-1/5).

    std is the sample standard deviation (ddof=1). Degenerate pools
    (constant values, or a single value where the spread is undefined)
    fall back to the floor of 1e-6.
    """
    values = np.asarray(values, dtype=np.float64)
    n = values.shape[0]
    if n < 1:
        raise ValueError("bandwidth needs at least one value")
    if n == 1:
        return MIN_BANDWIDTH
    sd = float(np.std(values, ddof=1))
    q75, q25 = np.percentile(values, [75.0, 25.0])
    spread = min(sd, float(q75 - q25) / 1.34)
    return max(MIN_BANDWIDTH, 0.9 * spread * n ** (-1.0 / 5.0))


def kde_density(samples: np.ndarray, x: np.ndarray | float, h: float) -> np.ndarray | float:
    """Gaussian kernel density of 1-D samples evaluated at x.

    Evaluation is blocked so that scoring a pool against itself never
    materializes the full M x M difference matrix.
    """
    samples = np.asarray(samples, dtype=np.float64).ravel()
    if samples.size == 0:
        raise ValueError("kde_density needs a non-empty sample pool")
    if h <= 0:
        raise ValueError(f"bandwidth must be positive, got {h}")
    scalar = np.isscalar(x) or np.ndim(x) == 0
    xs = np.atleast_1d(np.asarray(x, dtype=np.float64))
    out = np.empty(xs.shape[0])
    norm = 1.0 / (samples.size * h * _SQRT_2PI)
    inv = 1.0 / (2.0 * h * h)
    for lo in range(0, xs.shape[0], _EVAL_BLOCK):
        diff = xs[lo : lo + _EVAL_BLOCK, None] - samples[None, :]
        np.square(diff, out=diff)
        diff *= -inv
        np.exp(diff, out=diff)
        out[lo : lo + _EVAL_BLOCK] = diff.sum(axis=1)
    out *= norm
    return float(out[0]) if scalar else out


def _pool_bandwidths(samples: np.ndarray, cfg: EntropyConfig) -> np.ndarray:
    if isinstance(cfg.bandwidth, str):
        return np.array([silverman_bandwidth(samples[:, d]) for d in range(samples.shape[1])])
    return np.full(samples.shape[1], float(cfg.bandwidth))


def pool_origins(t: int, chunk_len: int) -> range:
    """Chunk origins whose predictions cover frame t."""
    return range(max(1, t - chunk_len + 1), t + 1)


def pool_samples(
    sampler: ProxySampler, traj: Trajectory, t: int, cfg: EntropyConfig
) -> ActionSampleSet:
    """Pool the predictions for frame t from all covering chunk origins."""
    if not 1 <= t <= traj.n_frames:
        raise ValueError(f"frame {t} outside [1, {traj.n_frames}]")
    rows = []
    for j in pool_origins(t, cfg.chunk_len):
        seed = derive_seed(cfg.seed, traj.trajectory_id, j)
        chunks = np.asarray(
            sampler.sample_chunks(traj.trajectory_id, j, cfg.chunk_len, cfg.n_samples, seed),
            dtype=np.float64,
        )
        rows.append(chunks[:, t - j, :])
    samples = np.concatenate(rows, axis=0)
    return ActionSampleSet(t, samples, _pool_bandwidths(samples, cfg))


def _joint_density_at_samples(samples: np.ndarray, bandwidths: np.ndarray) -> np.ndarray:
    m, dim = samples.shape
    scaled = samples / bandwidths[None, :]
    norm = 1.0 / (m * float(np.prod(bandwidths)) * _SQRT_2PI**dim)
    out = np.empty(m)
    for lo in range(0, m, _EVAL_BLOCK):
        diff = scaled[lo : lo + _EVAL_BLOCK, None, :] - scaled[None, :, :]
        np.square(diff, out=diff)
        ksum = diff.sum(axis=2)
        ksum *= -0.5
        np.exp(ksum, out=ksum)
        out[lo : lo + _EVAL_BLOCK] = ksum.sum(axis=1)
    return out * norm


def frame_entropy(sample_set: ActionSampleSet, cfg: EntropyConfig) -> float:
    """Entropy of one frame's pooled samples under the configured mode."""
    samples = sample_set.samples
    m = samples.shape[0]
    if cfg.dim_mode == "joint":
        dens = _joint_density_at_samples(samples, sample_set.bandwidths)
        log_dens = np.log(dens)
        if cfg.mode == "plogp":
            return float(-np.sum(dens * log_dens))
        return float(-np.mean(log_dens))
    total = 0.0
    for d in range(samples.shape[1]):
        dens = kde_density(samples[:, d], samples[:, d], float(sample_set.bandwidths[d]))
        log_dens = np.log(dens)
        if cfg.mode == "plogp":
            total -= float(np.sum(dens * log_dens))
        else:
            total -= float(np.mean(log_dens))
    return total


def trajectory_entropy(
    sampler: ProxySampler, traj: Trajectory, cfg: EntropyConfig
) -> EntropySeries:
    """Estimate entropy at every frame 1..T of a trajectory.

    Chunk tensors are cached per origin so each origin is sampled once
    even while feeding up to K frame pools; results are bitwise equal to
    calling pool_samples frame by frame.
    """
    n_frames = traj.n_frames
    values = np.empty(n_frames)
    cache: dict[int, np.ndarray] = {}
    for t in range(1, n_frames + 1):
        origins = pool_origins(t, cfg.chunk_len)
        try:
            for j in origins:
                if j not in cache:
                    seed = derive_seed(cfg.seed, traj.trajectory_id, j)
                    cache[j] = np.asarray(
                        sampler.sample_chunks(
                            traj.trajectory_id, j, cfg.chunk_len, cfg.n_samples, seed
                        ),
                        dtype=np.float64,
                    )
        except Exception as exc:
            raise EstimationError(f"frame {t} of {traj.trajectory_id}: {exc}") from exc
        for j in list(cache):
            if j < origins.start:
                del cache[j]
        samples = np.concatenate([cache[j][:, t - j, :] for j in origins], axis=0)
        sample_set = ActionSampleSet(t, samples, _pool_bandwidths(samples, cfg))
        values[t - 1] = frame_entropy(sample_set, cfg)
    return EntropySeries(traj.trajectory_id, values, mode=cfg.mode_tag)


def entropy_csv_name(index: int) -> str:
    return f"entropy_{index}.csv"


def write_entropy_csv(series: EntropySeries, path: Path | str) -> None:
    """Write t,entropy rows; floats as shortest round-trip decimals."""
    lines = ["t,entropy"]
    for t, value in enumerate(series.values, start=1):
        lines.append(f"{t},{float(value)!r}")
    atomic_write_text(Path(path), "\n".join(lines) + "\n")


def read_entropy_csv(path: Path | str, trajectory_id: str | None = None) -> EntropySeries:
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["t", "entropy"]:
            raise ValueError(f"{path}: expected header 't,entropy', got {header}")
        values = []
        for row in reader:
            if len(row) != 2:
                raise ValueError(f"{path}: malformed row {row}")
            t, value = int(row[0]), float(row[1])
            if t != len(values) + 1:
                raise ValueError(f"{path}: frame indices must run 1..T, got {t}")
            values.append(value)
    tid = trajectory_id if trajectory_id is not None else path.stem
    return EntropySeries(tid, np.array(values, dtype=np.float64))
