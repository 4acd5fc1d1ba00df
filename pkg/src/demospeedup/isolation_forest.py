"""Isolation forest scoring for 1-D series.

Trees isolate points by recursive random splits; anomalous points sit in
shallow leaves. The anomaly score is 2^(-E[path length]/c(psi)) with
c(m) the average unsuccessful-search path length of a BST of m nodes.

Because the data is 1-D, a tree partitions the sorted value array into
contiguous intervals, so tree construction and scoring walk index ranges
of the pre-sorted array instead of materializing node membership masks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_EULER_GAMMA = float(np.euler_gamma)


@dataclass
class IsolationForestParams:
    n_trees: int = 100
    subsample: int = 256
    contamination: float = 0.05
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_trees < 1:
            raise ValueError(f"n_trees must be >= 1, got {self.n_trees}")
        if self.subsample < 2:
            raise ValueError(f"subsample must be >= 2, got {self.subsample}")
        if not 0.0 <= self.contamination < 1.0:
            raise ValueError(f"contamination must be in [0, 1), got {self.contamination}")


def average_path_length(m: int) -> float:
    """c(m): expected isolation depth of a point among m training points."""
    if m <= 1:
        return 0.0
    if m == 2:
        return 1.0
    return 2.0 * (math.log(m - 1) + _EULER_GAMMA) - 2.0 * (m - 1) / m


def isolation_scores(values: np.ndarray, params: IsolationForestParams) -> np.ndarray:
    """Anomaly score in (0, 1) for every value, higher = more isolated."""
    values = np.asarray(values, dtype=np.float64).ravel()
    n = values.shape[0]
    if n < 2:
        raise ValueError(f"isolation forest needs at least 2 values, got {n}")
    psi = min(params.subsample, n)
    depth_limit = math.ceil(math.log2(psi))
    rng = np.random.default_rng(params.seed)

    order = np.argsort(values, kind="stable")
    eval_sorted = values[order]
    paths = np.zeros(n)

    for _ in range(params.n_trees):
        sub = values[rng.choice(n, size=psi, replace=False)]
        sub.sort()
        # stack rows: (train_lo, train_hi, eval_lo, eval_hi, depth), half-open
        stack = [(0, psi, 0, n, 0)]
        while stack:
            tlo, thi, elo, ehi, depth = stack.pop()
            size = thi - tlo
            if elo == ehi:
                continue
            lo_val, hi_val = sub[tlo], sub[thi - 1]
            if size <= 1 or depth >= depth_limit or lo_val == hi_val:
                paths[elo:ehi] += depth + average_path_length(size)
                continue
            split = lo_val + (hi_val - lo_val) * rng.random()
            tmid = tlo + int(np.searchsorted(sub[tlo:thi], split, side="left"))
            emid = elo + int(np.searchsorted(eval_sorted[elo:ehi], split, side="left"))
            # a split strictly inside (lo_val, hi_val) leaves both sides non-empty
            stack.append((tmid, thi, emid, ehi, depth + 1))
            stack.append((tlo, tmid, elo, emid, depth + 1))

    mean_paths = paths / params.n_trees
    scores_sorted = np.exp2(-mean_paths / average_path_length(psi))
    scores = np.empty(n)
    scores[order] = scores_sorted
    return scores


def flag_top_scores(scores: np.ndarray, contamination: float) -> np.ndarray:
    """Indices of the top ceil(contamination * n) scores, ties by index."""
    n = scores.shape[0]
    k = int(math.ceil(contamination * n))
    k = min(k, n - 1)  # keep at least one unflagged value as a replacement source
    if k <= 0:
        return np.empty(0, dtype=np.intp)
    ranking = np.lexsort((np.arange(n), -scores))
    flagged = np.sort(ranking[:k])
    return flagged
