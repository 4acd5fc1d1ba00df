"""Hierarchical density-based clustering on small point sets.

The pipeline is the classic one: core distances at min_samples, the
mutual-reachability graph, its minimum spanning tree, a single-linkage
hierarchy, a condensed tree at min_cluster_size, and stability-based
cluster extraction (excess of mass). Everything is dense and O(n^2),
which is the right trade at trajectory scale, and every step is
deterministic: MST ties resolve to the lexicographically smallest point
index, so identical inputs give identical partitions on every run.

Noise points carry the label -1; cluster labels are contiguous from 0,
ordered by each cluster's smallest member index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

NOISE = -1


@dataclass
class HdbscanParams:
    """min_samples defaults to min_cluster_size when unset.

    seed is accepted for interface stability; the implementation breaks
    all ties lexicographically and draws no random numbers.
    """

    min_cluster_size: int
    min_samples: int | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.min_cluster_size < 2:
            raise ValueError(f"min_cluster_size must be >= 2, got {self.min_cluster_size}")
        if self.min_samples is not None and self.min_samples < 1:
            raise ValueError(f"min_samples must be >= 1, got {self.min_samples}")

    @property
    def effective_min_samples(self) -> int:
        return self.min_samples if self.min_samples is not None else self.min_cluster_size


@dataclass
class ClusterLabels:
    labels: np.ndarray
    n_clusters: int


def default_min_cluster_size(n_frames: int) -> int:
    return max(5, math.ceil(0.02 * n_frames))


def core_distances(dist: np.ndarray, min_samples: int) -> np.ndarray:
    """Distance to the min_samples-th nearest neighbor, the point itself included."""
    k = min(min_samples, dist.shape[0])
    return np.partition(dist, k - 1, axis=1)[:, k - 1]


def mutual_reachability(dist: np.ndarray, core: np.ndarray) -> np.ndarray:
    mr = np.maximum(dist, np.maximum(core[:, None], core[None, :]))
    np.fill_diagonal(mr, 0.0)
    return mr


def _mst_edges(mr: np.ndarray) -> list[tuple[int, int, float]]:
    # Prim's on the dense graph; argmin takes the lowest index on ties
    n = mr.shape[0]
    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    best = mr[0].copy()
    best[0] = np.inf
    parent = np.zeros(n, dtype=np.intp)
    edges = []
    for _ in range(n - 1):
        u = int(np.argmin(best))
        edges.append((int(parent[u]), u, float(best[u])))
        in_tree[u] = True
        best[u] = np.inf
        improve = (mr[u] < best) & ~in_tree
        parent[improve] = u
        best[improve] = mr[u][improve]
    return edges


def _single_linkage(edges: list[tuple[int, int, float]], n: int) -> np.ndarray:
    """Merge MST edges ascending into a linkage table (left, right, dist, size)."""
    edges = sorted(edges, key=lambda e: (e[2], min(e[0], e[1]), max(e[0], e[1])))
    parent = np.arange(2 * n - 1, dtype=np.intp)
    size = np.ones(2 * n - 1, dtype=np.intp)

    def find(x: int) -> int:
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    linkage = np.empty((n - 1, 4))
    for i, (u, v, w) in enumerate(edges):
        ru, rv = find(u), find(v)
        new = n + i
        linkage[i] = (ru, rv, w, size[ru] + size[rv])
        size[new] = size[ru] + size[rv]
        parent[ru] = parent[rv] = new
    return linkage


def _leaves_under(node: int, linkage: np.ndarray, n: int) -> list[int]:
    out: list[int] = []
    stack = [node]
    while stack:
        cur = stack.pop()
        if cur < n:
            out.append(cur)
        else:
            row = linkage[cur - n]
            stack.extend((int(row[0]), int(row[1])))
    return out


def _condense(linkage: np.ndarray, n: int, mcs: int):
    """Collapse the hierarchy: splits where a side has < mcs points shed
    those points out of the parent cluster instead of forming a child."""
    parents: list[int] = []
    children: list[int] = []
    lambdas: list[float] = []
    sizes: list[int] = []

    root_cid = n
    next_cid = n + 1
    stack = [(2 * n - 2, root_cid)]
    while stack:
        node, cid = stack.pop()
        row = linkage[node - n]
        left, right, dist = int(row[0]), int(row[1]), float(row[2])
        lam = 1.0 / dist if dist > 0.0 else np.inf
        size_l = 1 if left < n else int(linkage[left - n][3])
        size_r = 1 if right < n else int(linkage[right - n][3])
        big = [(left, size_l), (right, size_r)]
        keep = [(c, s) for c, s in big if s >= mcs]
        shed = [c for c, s in big if s < mcs]
        if len(keep) == 2:
            for child, child_size in keep:
                parents.append(cid)
                children.append(next_cid)
                lambdas.append(lam)
                sizes.append(child_size)
                stack.append((child, next_cid))
                next_cid += 1
        else:
            for child in shed:
                for p in sorted(_leaves_under(child, linkage, n)):
                    parents.append(cid)
                    children.append(p)
                    lambdas.append(lam)
                    sizes.append(1)
            if keep:
                stack.append((keep[0][0], cid))
    return parents, children, lambdas, sizes, next_cid


def hdbscan(points: np.ndarray, params: HdbscanParams) -> ClusterLabels:
    """Cluster points; fewer points than min_cluster_size is all noise."""
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2:
        raise ValueError(f"points must be 2-D, got shape {points.shape}")
    n = points.shape[0]
    mcs = params.min_cluster_size
    if n < mcs:
        return ClusterLabels(np.full(n, NOISE, dtype=np.intp), 0)

    diff = points[:, None, :] - points[None, :, :]
    dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    core = core_distances(dist, params.effective_min_samples)
    mr = mutual_reachability(dist, core)
    edges = _mst_edges(mr)

    if all(w == 0.0 for _, _, w in edges):
        # every point mutually reachable at distance zero: one cluster
        return ClusterLabels(np.zeros(n, dtype=np.intp), 1)

    linkage = _single_linkage(edges, n)
    parents, children, lambdas, sizes, next_cid = _condense(linkage, n, mcs)
    root_cid = n

    birth = {root_cid: 0.0}
    for parent, child, lam in zip(parents, children, lambdas):
        if child >= n:
            birth[child] = lam
    stability = {cid: 0.0 for cid in range(n, next_cid)}
    for parent, lam, size in zip(parents, lambdas, sizes):
        gain = (lam - birth[parent]) * size
        stability[parent] += gain if not math.isnan(gain) else np.inf

    cluster_children: dict[int, list[int]] = {}
    cluster_parent: dict[int, int] = {}
    for parent, child in zip(parents, children):
        if child >= n:
            cluster_children.setdefault(parent, []).append(child)
            cluster_parent[child] = parent

    candidates = [cid for cid in range(n + 1, next_cid)]
    selected: dict[int, bool] = {}
    effective: dict[int, float] = {}
    for cid in sorted(candidates, reverse=True):
        kids = cluster_children.get(cid, [])
        kid_sum = sum(effective[k] for k in kids)
        if kids and kid_sum > stability[cid]:
            selected[cid] = False
            effective[cid] = kid_sum
        else:
            selected[cid] = True
            effective[cid] = stability[cid]

    final: set[int] = set()
    for cid in sorted(candidates):
        if not selected[cid]:
            continue
        anc = cluster_parent.get(cid)
        blocked = False
        while anc is not None and anc != root_cid:
            if anc in final:
                blocked = True
                break
            anc = cluster_parent.get(anc)
        if not blocked:
            final.add(cid)

    labels = np.full(n, NOISE, dtype=np.intp)
    members: dict[int, list[int]] = {cid: [] for cid in final}
    for parent, child in zip(parents, children):
        if child >= n:
            continue
        anc: int | None = parent
        while anc is not None and anc != root_cid:
            if anc in final:
                members[anc].append(child)
                break
            anc = cluster_parent.get(anc)
    ordered = sorted(final, key=lambda cid: min(members[cid]) if members[cid] else n)
    for label, cid in enumerate(ordered):
        labels[members[cid]] = label
    return ClusterLabels(labels, len(ordered))
