"""Trajectory segmentation into precision and casualness regions.

Pipeline: outlier cleaning of the raw entropy series (isolation forest,
flagged frames replaced by their nearest unflagged neighbor's value),
z-score normalization of (frame index, entropy) pairs, density
clustering of the normalized points, then the precision rule: every
cluster whose mean normalized entropy is below zero is precision, all
other frames (other clusters and noise) are casualness. The two sets
partition 1..T.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._fsio import atomic_write_text
from .entropy import EntropySeries
from .hdbscan import (
    NOISE,
    ClusterLabels,
    HdbscanParams,
    default_min_cluster_size,
    hdbscan,
)
from .isolation_forest import IsolationForestParams, flag_top_scores, isolation_scores


@dataclass
class PointSet:
    """Normalized (time, entropy) points, one per frame.

    Each coordinate is a population z-score (constant coordinates map to
    zeros); the time coordinate is additionally scaled by time_weight,
    so its variance is time_weight squared rather than 1 when the weight
    is not the default.
    """

    points: np.ndarray
    time_weight: float = 1.0


@dataclass
class PrecisionLabeling:
    """Disjoint precision/casualness cover of frames 1..T.

    Runs are half-open [start, stop) on 1-based frame indices, merged
    and sorted; the JSON form uses inclusive [start, end] ranges.
    """

    trajectory_id: str
    n_frames: int
    precision_runs: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        prev_stop = 0
        for start, stop in self.precision_runs:
            if not (1 <= start < stop <= self.n_frames + 1):
                raise ValueError(f"run [{start}, {stop}) outside frames 1..{self.n_frames}")
            if start <= prev_stop:
                raise ValueError("precision runs must be sorted, disjoint and merged")
            prev_stop = stop

    @classmethod
    def from_mask(
        cls, trajectory_id: str, precision_mask: np.ndarray
    ) -> "PrecisionLabeling":
        """Build from a boolean array indexed by frame-1 (True = precision)."""
        mask = np.asarray(precision_mask, dtype=bool)
        runs = []
        start = None
        for i, flag in enumerate(mask):
            if flag and start is None:
                start = i + 1
            elif not flag and start is not None:
                runs.append((start, i + 1))
                start = None
        if start is not None:
            runs.append((start, mask.shape[0] + 1))
        return cls(trajectory_id, int(mask.shape[0]), tuple(runs))

    def precision_mask(self) -> np.ndarray:
        mask = np.zeros(self.n_frames, dtype=bool)
        for start, stop in self.precision_runs:
            mask[start - 1 : stop - 1] = True
        return mask

    def casual_mask(self) -> np.ndarray:
        return ~self.precision_mask()

    def casual_runs(self) -> tuple[tuple[int, int], ...]:
        return PrecisionLabeling.from_mask(self.trajectory_id, self.casual_mask()).precision_runs

    def is_precision(self, t: int) -> bool:
        if not 1 <= t <= self.n_frames:
            raise ValueError(f"frame {t} outside [1, {self.n_frames}]")
        return any(start <= t < stop for start, stop in self.precision_runs)

    def precision_set(self) -> set[int]:
        return {t for start, stop in self.precision_runs for t in range(start, stop)}


def clean_outliers(series: EntropySeries, params: IsolationForestParams) -> EntropySeries:
    """Replace anomalous entropy values before normalization.

    Flagged frames take the value of the nearest preceding unflagged
    frame (nearest following when nothing precedes). contamination 0 is
    an exact no-op apart from resetting the cleaned flags.
    """
    values = series.values
    n = values.shape[0]
    if n < 2:
        raise ValueError(f"cleaning needs at least 2 frames, got {n}")
    if params.contamination == 0.0:
        return EntropySeries(series.trajectory_id, values.copy(), mode=series.mode)
    scores = isolation_scores(values, params)
    flagged = flag_top_scores(scores, params.contamination)
    cleaned = np.zeros(n, dtype=bool)
    cleaned[flagged] = True
    out = values.copy()
    unflagged = np.nonzero(~cleaned)[0]
    for i in flagged:
        before = unflagged[unflagged < i]
        source = before[-1] if before.size else unflagged[unflagged > i][0]
        out[i] = values[source]
    return EntropySeries(series.trajectory_id, out, cleaned, series.mode)


def _zscore(values: np.ndarray) -> np.ndarray:
    # ptp catches constant input even when the float mean is inexact,
    # which would otherwise leave a spurious nonzero sd
    sd = float(np.std(values))  # population convention
    if sd == 0.0 or np.ptp(values) == 0.0:
        return np.zeros_like(values)
    return (values - values.mean()) / sd


def normalize(series: EntropySeries, time_weight: float = 1.0) -> PointSet:
    """z-score (t, entropy) per coordinate; constant coordinates become zeros."""
    if series.n_frames < 2:
        raise ValueError(f"normalization needs at least 2 frames, got {series.n_frames}")
    t = np.arange(1, series.n_frames + 1, dtype=np.float64)
    points = np.stack([_zscore(t) * time_weight, _zscore(series.values)], axis=1)
    return PointSet(points, time_weight)


def precision_label(
    clusters: ClusterLabels, points: PointSet, trajectory_id: str
) -> PrecisionLabeling:
    """Clusters with mean normalized entropy below zero are precision."""
    labels = clusters.labels
    h_norm = points.points[:, 1]
    mask = np.zeros(labels.shape[0], dtype=bool)
    for label in range(clusters.n_clusters):
        member = labels == label
        if float(h_norm[member].mean()) < 0.0:
            mask[member] = True
    # noise frames stay casual
    return PrecisionLabeling.from_mask(trajectory_id, mask)


def segment(
    series: EntropySeries,
    forest: IsolationForestParams | None = None,
    clustering: HdbscanParams | None = None,
    time_weight: float = 1.0,
) -> PrecisionLabeling:
    """Full segmentation of one entropy series.

    Trajectories shorter than min_cluster_size cluster to all-noise and
    therefore label as all-casualness rather than raising.
    """
    if forest is None:
        forest = IsolationForestParams()
    if clustering is None:
        clustering = HdbscanParams(default_min_cluster_size(series.n_frames))
    cleaned = clean_outliers(series, forest)
    points = normalize(cleaned, time_weight)
    clusters = hdbscan(points.points, clustering)
    return precision_label(clusters, points, series.trajectory_id)


def labels_file_name(index: int) -> str:
    return f"labels_{index}.json"


def _inclusive(runs: tuple[tuple[int, int], ...]) -> list[list[int]]:
    return [[start, stop - 1] for start, stop in runs]


def write_labels(labeling: PrecisionLabeling, path: Path | str) -> None:
    payload = {
        "trajectory": labeling.trajectory_id,
        "frames": labeling.n_frames,
        "precision": _inclusive(labeling.precision_runs),
        "casual": _inclusive(labeling.casual_runs()),
    }
    atomic_write_text(Path(path), json.dumps(payload, indent=2) + "\n")


def read_labels(path: Path | str) -> PrecisionLabeling:
    path = Path(path)
    raw = json.loads(path.read_text("utf-8"))
    n_frames = int(raw["frames"])
    mask = np.zeros(n_frames, dtype=bool)
    for start, end in raw["precision"]:
        if not 1 <= start <= end <= n_frames:
            raise ValueError(f"{path}: range [{start}, {end}] outside frames 1..{n_frames}")
        mask[start - 1 : end] = True
    return PrecisionLabeling.from_mask(str(raw["trajectory"]), mask)
