"""Proxy-policy action samplers.

Entropy estimation needs, for each frame t of a trajectory, N sampled
action chunks predicted at t. Two sources are provided:

* SyntheticSampler draws chunks from a per-frame Gaussian around the
  demonstrated action, with a known per-frame scale. Ground truth for
  tests and a stand-in when no policy rollout archive exists.
* FileSampler replays chunks exported by an external policy into a
  binary archive, one file per trajectory.

Sample archive layout (little-endian):

    bytes 0..3  magic b"DSMP"
    byte  4     format version (1)
    u32 T, u32 N, u32 K, u32 D
    then T*N*K*D float32 values, indexed (t, i, k, d)

Archive files are named samples_<i>.bin with i the trajectory's position
in the dataset manifest, mirroring traj_<i>.bin.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import numpy as np

from ._fsio import atomic_write_bytes
from .model import Dataset, DatasetFormatError

SAMPLES_MAGIC = b"DSMP"
SAMPLES_VERSION = 1
_HEADER = struct.Struct("<4sBIIII")


class ProxySampler(Protocol):
    """Yields N action chunks of length K predicted at frame t."""

    def sample_chunks(
        self, trajectory_id: str, t: int, chunk_len: int, n_samples: int, seed: int
    ) -> np.ndarray:
        """Return an (N, K, D) float array of sampled chunks."""
        ...


@dataclass
class SyntheticSampler:
    """Gaussian chunks centered on the demonstrated actions.

    means[tid] is the (T, D) demonstrated action sequence, sigmas[tid]
    the (T,) per-frame scale. Row k of a chunk predicted at frame t is
    drawn from Normal(mu_{t+k}, sigma_{t+k}) elementwise, with frame
    indices past the end clamped to the final frame (the same convention
    chunk_at uses for padding).
    """

    means: dict[str, np.ndarray]
    sigmas: dict[str, np.ndarray]

    def __post_init__(self) -> None:
        self.means = {k: np.asarray(v, dtype=np.float64) for k, v in self.means.items()}
        self.sigmas = {k: np.asarray(v, dtype=np.float64) for k, v in self.sigmas.items()}
        for tid, mu in self.means.items():
            if mu.shape[0] != self.sigmas[tid].shape[0]:
                raise ValueError(f"{tid}: means and sigmas disagree on frame count")

    def sample_chunks(
        self, trajectory_id: str, t: int, chunk_len: int, n_samples: int, seed: int
    ) -> np.ndarray:
        mu = self.means[trajectory_id]
        sigma = self.sigmas[trajectory_id]
        n_frames = mu.shape[0]
        if not 1 <= t <= n_frames:
            raise ValueError(f"frame {t} outside [1, {n_frames}]")
        rows = np.minimum(np.arange(t, t + chunk_len), n_frames) - 1
        rng = np.random.default_rng(seed)
        noise = rng.standard_normal((n_samples, chunk_len, mu.shape[1]))
        return mu[rows][None, :, :] + sigma[rows][None, :, None] * noise


def write_sample_archive(tensor: np.ndarray, path: Path | str) -> None:
    """Write a (T, N, K, D) chunk tensor to a sample archive file."""
    tensor = np.asarray(tensor)
    if tensor.ndim != 4:
        raise ValueError(f"sample tensor must be 4-D (T, N, K, D), got shape {tensor.shape}")
    t, n, k, d = tensor.shape
    header = _HEADER.pack(SAMPLES_MAGIC, SAMPLES_VERSION, t, n, k, d)
    body = np.ascontiguousarray(tensor, dtype="<f4").tobytes()
    atomic_write_bytes(Path(path), header + body)


def read_sample_archive(path: Path | str) -> np.ndarray:
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < _HEADER.size:
        raise DatasetFormatError(f"{path}: truncated header ({len(raw)} bytes)")
    magic, version, t, n, k, d = _HEADER.unpack_from(raw)
    if magic != SAMPLES_MAGIC:
        raise DatasetFormatError(f"{path}: bad magic {magic!r}")
    if version != SAMPLES_VERSION:
        raise DatasetFormatError(f"{path}: unsupported version {version}")
    expect = _HEADER.size + 4 * t * n * k * d
    if len(raw) != expect:
        raise DatasetFormatError(f"{path}: size {len(raw)} != expected {expect}")
    flat = np.frombuffer(raw, dtype="<f4", offset=_HEADER.size)
    return flat.reshape(t, n, k, d).copy()


def sample_archive_name(index: int) -> str:
    return f"samples_{index}.bin"


@dataclass
class FileSampler:
    """Replays per-frame chunk tensors from a sample archive directory."""

    path: Path
    files: dict[str, Path] = field(default_factory=dict)
    _cache: dict[str, np.ndarray] = field(default_factory=dict, repr=False)

    @classmethod
    def for_dataset(cls, path: Path | str, dataset: Dataset) -> "FileSampler":
        root = Path(path)
        files = {}
        for i, traj in enumerate(dataset.trajectories):
            f = root / sample_archive_name(i)
            if not f.is_file():
                raise DatasetFormatError(f"{f}: missing sample archive")
            files[traj.trajectory_id] = f
        return cls(root, files)

    def _tensor(self, trajectory_id: str) -> np.ndarray:
        if trajectory_id not in self._cache:
            try:
                f = self.files[trajectory_id]
            except KeyError:
                raise DatasetFormatError(
                    f"{self.path}: no sample archive for trajectory {trajectory_id!r}"
                ) from None
            self._cache[trajectory_id] = read_sample_archive(f)
        return self._cache[trajectory_id]

    def sample_chunks(
        self, trajectory_id: str, t: int, chunk_len: int, n_samples: int, seed: int
    ) -> np.ndarray:
        # seed is part of the sampler contract but archives are frozen data
        tensor = self._tensor(trajectory_id)
        n_frames, n, k, _ = tensor.shape
        if not 1 <= t <= n_frames:
            raise ValueError(f"frame {t} outside [1, {n_frames}]")
        if n != n_samples or k != chunk_len:
            raise DatasetFormatError(
                f"{self.files[trajectory_id]}: archive holds N={n}, K={k}; "
                f"requested N={n_samples}, K={chunk_len}"
            )
        return tensor[t - 1].astype(np.float64)
