"""Kernel density, bandwidths, and per-frame entropy estimation.

Numeric expectations marked "frozen" were computed independently by
tests/oracles/derive_values.py and pasted here.
"""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from demospeedup.entropy import (
    ActionSampleSet,
    EntropyConfig,
    EntropySeries,
    EstimationError,
    frame_entropy,
    kde_density,
    pool_origins,
    pool_samples,
    read_entropy_csv,
    silverman_bandwidth,
    trajectory_entropy,
    write_entropy_csv,
)
from demospeedup.samplers import SyntheticSampler
from helpers import line_trajectory

# frozen oracle values
PHI0 = 0.3989422804014327
TWO_SAMPLE_AT_ZERO = 0.24197072451914337
PLOGP_FOUR_IDENTICAL = 1.4664137359416791
RESUB_FOUR_IDENTICAL = 0.9189385332046727
SILVERMAN_PM1 = 0.5846981395272475


def test_kde_single_sample_peak():
    assert kde_density(np.array([0.0]), 0.0, 1.0) == pytest.approx(PHI0, rel=1e-12)


def test_kde_two_samples_at_midpoint():
    got = kde_density(np.array([-1.0, 1.0]), 0.0, 1.0)
    assert got == pytest.approx(TWO_SAMPLE_AT_ZERO, rel=1e-12)


def test_kde_vector_matches_scalar_across_blocks():
    # more evaluation points than one internal block to cover the seams
    rng = np.random.default_rng(5)
    samples = rng.normal(size=200)
    xs = rng.normal(size=1200)
    vec = kde_density(samples, xs, 0.3)
    direct = np.array([kde_density(samples, float(x), 0.3) for x in xs])
    assert np.allclose(vec, direct, rtol=1e-12, atol=0)


def test_kde_integrates_to_one():
    samples = np.array([-2.0, 0.0, 0.5, 3.0])
    xs = np.linspace(-12.0, 13.0, 4001)
    dens = kde_density(samples, xs, 0.8)
    assert np.trapezoid(dens, xs) == pytest.approx(1.0, abs=1e-6)


def test_kde_rejects_bad_inputs():
    with pytest.raises(ValueError, match="non-empty"):
        kde_density(np.array([]), 0.0, 1.0)
    with pytest.raises(ValueError, match="positive"):
        kde_density(np.array([1.0]), 0.0, 0.0)


def test_silverman_two_points():
    assert silverman_bandwidth(np.array([-1.0, 1.0])) == pytest.approx(SILVERMAN_PM1, rel=1e-12)


def test_silverman_degenerate_pools_hit_floor():
    assert silverman_bandwidth(np.array([3.0])) == 1e-6
    assert silverman_bandwidth(np.full(50, 2.5)) == 1e-6
    with pytest.raises(ValueError):
        silverman_bandwidth(np.array([]))


def _four_identical() -> ActionSampleSet:
    return ActionSampleSet(1, np.full((4, 1), 5.0), np.array([1.0]))


def test_frame_entropy_plogp_four_identical():
    cfg = EntropyConfig(bandwidth=1.0, mode="plogp")
    assert frame_entropy(_four_identical(), cfg) == pytest.approx(
        PLOGP_FOUR_IDENTICAL, rel=1e-12
    )


def test_frame_entropy_resubstitution_four_identical():
    cfg = EntropyConfig(bandwidth=1.0, mode="resubstitution")
    assert frame_entropy(_four_identical(), cfg) == pytest.approx(
        RESUB_FOUR_IDENTICAL, rel=1e-12
    )


def test_per_dim_entropy_sums_over_dimensions():
    rng = np.random.default_rng(2)
    col = rng.normal(size=30)
    one = ActionSampleSet(1, col[:, None], np.array([0.4]))
    two = ActionSampleSet(1, np.stack([col, col], axis=1), np.array([0.4, 0.4]))
    cfg = EntropyConfig(bandwidth=0.4, mode="resubstitution")
    assert frame_entropy(two, cfg) == pytest.approx(2.0 * frame_entropy(one, cfg), rel=1e-12)


def test_joint_mode_matches_manual_product_kernel():
    samples = np.array([[0.0, 0.0], [1.0, -1.0], [0.5, 2.0]])
    h = np.array([0.7, 1.1])
    cfg = EntropyConfig(bandwidth=0.7, mode="resubstitution", dim_mode="joint")
    # manual product-kernel density at each sample
    dens = []
    for x in samples:
        total = 0.0
        for s in samples:
            quad = np.sum(((x - s) / h) ** 2)
            total += math.exp(-0.5 * quad)
        dens.append(total / (len(samples) * h.prod() * (2 * math.pi)))
    expect = -float(np.mean(np.log(dens)))
    got = frame_entropy(ActionSampleSet(1, samples, h), cfg)
    assert got == pytest.approx(expect, rel=1e-12)


def test_config_validation():
    with pytest.raises(ValueError):
        EntropyConfig(n_samples=1)
    with pytest.raises(ValueError):
        EntropyConfig(chunk_len=0)
    with pytest.raises(ValueError):
        EntropyConfig(mode="midpoint")
    with pytest.raises(ValueError):
        EntropyConfig(dim_mode="columns")
    with pytest.raises(ValueError):
        EntropyConfig(bandwidth=-0.1)
    with pytest.raises(ValueError):
        EntropyConfig(bandwidth="scott")
    assert EntropyConfig().mode_tag == "plogp/per-dim"


def test_pool_origins_window():
    assert list(pool_origins(1, 8)) == [1]
    assert list(pool_origins(5, 8)) == [1, 2, 3, 4, 5]
    assert list(pool_origins(10, 8)) == [3, 4, 5, 6, 7, 8, 9, 10]
    assert list(pool_origins(4, 1)) == [4]


def test_pool_samples_collects_covering_predictions():
    traj = line_trajectory(6)
    sampler = SyntheticSampler(
        {"traj0": traj.actions.astype(np.float64)}, {"traj0": np.zeros(6)}
    )
    cfg = EntropyConfig(n_samples=5, chunk_len=3, bandwidth=1.0)
    pool = pool_samples(sampler, traj, 4, cfg)
    # origins 2,3,4 each contribute 5 noiseless predictions of frame 4
    assert pool.samples.shape == (15, 1)
    assert np.all(pool.samples == 3.0)
    head = pool_samples(sampler, traj, 1, cfg)
    assert head.samples.shape == (5, 1)
    with pytest.raises(ValueError, match="outside"):
        pool_samples(sampler, traj, 7, cfg)


def test_trajectory_entropy_matches_frame_by_frame_pooling():
    profile_mu = np.linspace(0.0, 1.0, 6)[:, None]
    sampler = SyntheticSampler({"traj0": profile_mu}, {"traj0": np.full(6, 0.2)})
    traj = line_trajectory(6)
    cfg = EntropyConfig(n_samples=8, chunk_len=3, seed=9)
    series = trajectory_entropy(sampler, traj, cfg)
    direct = np.array(
        [frame_entropy(pool_samples(sampler, traj, t, cfg), cfg) for t in range(1, 7)]
    )
    assert series.n_frames == 6
    assert series.mode == "plogp/per-dim"
    assert np.array_equal(series.values, direct)  # bitwise, via the shared seeds


def test_trajectory_entropy_orders_noise_levels():
    # two noise levels; the quiet half must score lower on average
    sigma = np.concatenate([np.full(20, 0.01), np.full(20, 0.3)])
    mu = np.zeros((40, 2))
    sampler = SyntheticSampler({"traj0": mu}, {"traj0": sigma})
    traj = line_trajectory(40, dim=2)
    series = trajectory_entropy(sampler, traj, EntropyConfig(n_samples=25, chunk_len=4))
    assert series.values[:20].mean() < series.values[20:].mean()


def test_estimation_error_names_frame_and_trajectory():
    class Broken:
        def sample_chunks(self, trajectory_id, t, chunk_len, n_samples, seed):
            raise RuntimeError("boom")

    with pytest.raises(EstimationError, match="frame 1 of traj0"):
        trajectory_entropy(Broken(), line_trajectory(3), EntropyConfig())


def test_entropy_csv_roundtrip_is_exact(tmp_path):
    rng = np.random.default_rng(3)
    series = EntropySeries("demo", rng.normal(size=17))
    path = tmp_path / "entropy_0.csv"
    write_entropy_csv(series, path)
    back = read_entropy_csv(path, "demo")
    assert back.trajectory_id == "demo"
    assert np.array_equal(back.values, series.values)  # repr() round-trips floats
    assert read_entropy_csv(path).trajectory_id == "entropy_0"


def test_entropy_csv_rejects_malformed(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("frame,value\n1,0.5\n")
    with pytest.raises(ValueError, match="header"):
        read_entropy_csv(path)
    path.write_text("t,entropy\n1,0.5\n3,0.6\n")
    with pytest.raises(ValueError, match="1..T"):
        read_entropy_csv(path)
    path.write_text("t,entropy\n1,0.5,9\n")
    with pytest.raises(ValueError, match="malformed"):
        read_entropy_csv(path)


def test_series_cleaned_flags_default_and_validate():
    series = EntropySeries("x", np.zeros(4))
    assert series.cleaned.dtype == bool and not series.cleaned.any()
    with pytest.raises(ValueError, match="cleaned"):
        EntropySeries("x", np.zeros(4), cleaned=np.zeros(3, dtype=bool))


@settings(max_examples=60, deadline=None, derandomize=True)
@given(
    values=st.lists(
        st.floats(min_value=-50.0, max_value=50.0, allow_nan=False),
        min_size=2,
        max_size=40,
    ),
    mode=st.sampled_from(["plogp", "resubstitution"]),
)
def test_entropy_is_finite_for_any_pool(values, mode):
    samples = np.asarray(values)[:, None]
    pool = ActionSampleSet(1, samples, np.array([silverman_bandwidth(samples[:, 0])]))
    got = frame_entropy(pool, EntropyConfig(mode=mode))
    assert math.isfinite(got)
