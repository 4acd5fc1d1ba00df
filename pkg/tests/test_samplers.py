"""Samplers: seed derivation, synthetic chunks, archive replay."""

from __future__ import annotations

import numpy as np
import pytest

from demospeedup._seeding import derive_seed
from demospeedup.model import Dataset, DatasetFormatError, Trajectory
from demospeedup.samplers import (
    FileSampler,
    SyntheticSampler,
    read_sample_archive,
    sample_archive_name,
    write_sample_archive,
)
from helpers import line_trajectory


def test_derive_seed_is_stable_and_distinct():
    a = derive_seed(0, "traj0", 1)
    assert a == derive_seed(0, "traj0", 1)
    assert a != derive_seed(0, "traj0", 2)
    assert a != derive_seed(0, "traj1", 1)
    assert a != derive_seed(1, "traj0", 1)
    assert 0 <= a < 2**64


def test_synthetic_shape_and_determinism():
    mu = np.arange(10.0)[:, None] * np.ones((1, 3))
    sampler = SyntheticSampler({"x": mu}, {"x": np.full(10, 0.5)})
    one = sampler.sample_chunks("x", 4, 6, 7, seed=42)
    two = sampler.sample_chunks("x", 4, 6, 7, seed=42)
    assert one.shape == (7, 6, 3)
    assert np.array_equal(one, two)
    assert not np.array_equal(one, sampler.sample_chunks("x", 4, 6, 7, seed=43))


def test_synthetic_zero_scale_returns_means_with_tail_clamp():
    mu = np.arange(5.0)[:, None]
    sampler = SyntheticSampler({"x": mu}, {"x": np.zeros(5)})
    chunk = sampler.sample_chunks("x", 4, 4, 2, seed=0)
    # frames 4,5 then clamped to the final frame twice
    assert chunk[0, :, 0].tolist() == [3.0, 4.0, 4.0, 4.0]
    assert np.array_equal(chunk[0], chunk[1])


def test_synthetic_rejects_bad_inputs():
    with pytest.raises(ValueError, match="disagree"):
        SyntheticSampler({"x": np.zeros((4, 1))}, {"x": np.zeros(3)})
    sampler = SyntheticSampler({"x": np.zeros((4, 1))}, {"x": np.ones(4)})
    with pytest.raises(ValueError, match="outside"):
        sampler.sample_chunks("x", 5, 2, 2, seed=0)
    with pytest.raises(KeyError):
        sampler.sample_chunks("y", 1, 2, 2, seed=0)


def test_archive_roundtrip(tmp_path):
    rng = np.random.default_rng(7)
    tensor = rng.normal(size=(5, 3, 2, 4)).astype(np.float32)
    path = tmp_path / "samples_0.bin"
    write_sample_archive(tensor, path)
    assert np.array_equal(read_sample_archive(path), tensor)


def test_archive_rejects_malformed(tmp_path):
    with pytest.raises(ValueError, match="4-D"):
        write_sample_archive(np.zeros((2, 2)), tmp_path / "x.bin")
    path = tmp_path / "samples_0.bin"
    write_sample_archive(np.zeros((2, 2, 2, 1), dtype=np.float32), path)
    raw = bytearray(path.read_bytes())
    raw[0] ^= 0xFF
    path.write_bytes(bytes(raw))
    with pytest.raises(DatasetFormatError, match="magic"):
        read_sample_archive(path)
    path.write_bytes(bytes(raw)[:10])
    with pytest.raises(DatasetFormatError, match="truncated"):
        read_sample_archive(path)


def _dataset_with_archives(tmp_path, n=2, frames=4, k=3, dim=2, samples=5):
    trajs = [line_trajectory(frames, dim=dim, tid=f"t{i}") for i in range(n)]
    dataset = Dataset(trajs, dim, 50.0)
    rng = np.random.default_rng(1)
    tensors = {}
    for i, traj in enumerate(trajs):
        tensor = rng.normal(size=(frames, samples, k, dim)).astype(np.float32)
        write_sample_archive(tensor, tmp_path / sample_archive_name(i))
        tensors[traj.trajectory_id] = tensor
    return dataset, tensors


def test_file_sampler_replays_archive(tmp_path):
    dataset, tensors = _dataset_with_archives(tmp_path)
    sampler = FileSampler.for_dataset(tmp_path, dataset)
    got = sampler.sample_chunks("t1", 3, 3, 5, seed=999)  # seed irrelevant for replay
    assert got.dtype == np.float64
    assert np.array_equal(got, tensors["t1"][2].astype(np.float64))


def test_file_sampler_missing_archive(tmp_path):
    dataset, _ = _dataset_with_archives(tmp_path)
    (tmp_path / sample_archive_name(1)).unlink()
    with pytest.raises(DatasetFormatError, match="missing sample archive"):
        FileSampler.for_dataset(tmp_path, dataset)


def test_file_sampler_rejects_shape_mismatch(tmp_path):
    dataset, _ = _dataset_with_archives(tmp_path, k=3, samples=5)
    sampler = FileSampler.for_dataset(tmp_path, dataset)
    with pytest.raises(DatasetFormatError, match="requested"):
        sampler.sample_chunks("t0", 1, 4, 5, seed=0)
    with pytest.raises(DatasetFormatError, match="requested"):
        sampler.sample_chunks("t0", 1, 3, 6, seed=0)
    with pytest.raises(ValueError, match="outside"):
        sampler.sample_chunks("t0", 9, 3, 5, seed=0)


def test_file_sampler_unknown_trajectory(tmp_path):
    dataset, _ = _dataset_with_archives(tmp_path)
    sampler = FileSampler.for_dataset(tmp_path, dataset)
    with pytest.raises(DatasetFormatError, match="no sample archive"):
        sampler.sample_chunks("nope", 1, 3, 5, seed=0)
