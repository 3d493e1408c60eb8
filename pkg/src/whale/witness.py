"""Lazy witness filtration on a landmark set.

Every non-landmark point is a witness.  A witness ``w`` with sorted nearest
landmarks ``l_1, ..., l_k`` witnesses each subset ``sigma`` of that list at
cost ``max_{v in sigma} |w - v|``; the simplex enters the filtration at the
smallest cost over all witnesses that see it.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.spatial import cKDTree

from .cloud import PointCloud
from .errors import EmptyWitnessSet, InvalidArgument
from .filtration import SimplicialFiltration, assemble
from .landmarks import LandmarkSet

__all__ = ["WitnessParams", "WitnessNeighbors", "landmark_knn", "build_witness_filtration"]


@dataclass(frozen=True)
class WitnessParams:
    """``max_dim`` is the top homology dimension; simplices go one dimension higher."""

    k_witness: int = 4
    max_dim: int = 1

    def __post_init__(self):
        if self.max_dim not in (1, 2):
            raise InvalidArgument(f"max_dim must be 1 or 2, got {self.max_dim}")
        if self.k_witness < self.max_dim + 1:
            raise InvalidArgument(
                f"k_witness must be at least max_dim + 1 = {self.max_dim + 1}, got {self.k_witness}"
            )


@dataclass(frozen=True)
class WitnessNeighbors:
    """Nearest landmarks of each witness, ascending by ``(distance, ordinal)``."""

    witnesses: np.ndarray
    ordinals: np.ndarray
    distances: np.ndarray

    def __len__(self):
        return len(self.witnesses)

    def __getitem__(self, i):
        return list(zip(self.ordinals[i].tolist(), self.distances[i].tolist()))


def _row_distances(points, targets):
    diff = points[:, None, :] - targets
    return np.sqrt(np.einsum("...k,...k->...", diff, diff))


def _sort_rows(ordinals, dists):
    # lexicographic by (distance, ordinal) within each row
    rows = np.repeat(np.arange(len(dists)), dists.shape[1])
    order = np.lexsort((ordinals.ravel(), dists.ravel(), rows)).reshape(dists.shape)
    order -= (np.arange(len(dists)) * dists.shape[1])[:, None]
    return np.take_along_axis(ordinals, order, 1), np.take_along_axis(dists, order, 1)


def _knn_exact(queries, targets, k):
    """Exact k nearest targets per query with ties broken by lower target index.

    A k-d tree proposes ``k + 1`` candidates; distances are recomputed
    directly and any row whose k-th and (k+1)-th distances are too close to
    separate is redone by a full scan.
    """
    m = len(targets)
    k = min(k, m)
    probe = min(m, k + 1)
    if len(queries) == 0:
        return np.empty((0, k), dtype=np.int64), np.empty((0, k))
    tree = cKDTree(targets)
    _, cand = tree.query(queries, k=probe)
    cand = np.asarray(cand, dtype=np.int64).reshape(len(queries), probe)
    dist = _row_distances(queries, targets[cand])
    cand, dist = _sort_rows(cand, dist)
    if probe > k:
        gap = dist[:, k] - dist[:, k - 1]
        unsure = np.flatnonzero(gap <= 1e-9 * (1.0 + dist[:, k]))
        for r in unsure:
            full = _row_distances(queries[r : r + 1], targets[None, :, :])[0]
            order = np.lexsort((np.arange(m), full))[:probe]
            cand[r], dist[r] = order, full[order]
    return cand[:, :k], dist[:, :k]


def landmark_knn(cloud: PointCloud, landmarks: LandmarkSet, k: int) -> WitnessNeighbors:
    """The ``min(k, m)`` nearest landmarks (by ordinal) of every witness."""
    if landmarks.m < 1:
        raise InvalidArgument("at least one landmark is required")
    if k < 1:
        raise InvalidArgument(f"k must be positive, got {k}")
    witnesses = landmarks.witnesses(cloud.n)
    ords, dists = _knn_exact(cloud.points[witnesses], cloud.points[landmarks.indices], k)
    return WitnessNeighbors(witnesses, ords, dists)


def _encode(verts, base):
    key = np.zeros(len(verts), dtype=np.int64)
    for c in range(verts.shape[1]):
        key = key * base + verts[:, c]
    return key


def build_witness_filtration(
    cloud: PointCloud,
    landmarks: LandmarkSet,
    params: WitnessParams = WitnessParams(),
    neighbors: WitnessNeighbors | None = None,
) -> SimplicialFiltration:
    """Lazy witness filtration with simplices up to dimension ``max_dim + 1``.

    Landmarks enter at 0.  The vertex ordinals of the result index
    ``landmarks.indices``; ``vertex_coords`` holds the landmark coordinates.
    """
    m = landmarks.m
    if m < params.max_dim + 1:
        raise InvalidArgument(f"need at least {params.max_dim + 1} landmarks, got {m}")
    if m >= cloud.n:
        raise EmptyWitnessSet("every point is a landmark; no witnesses remain")
    if neighbors is None:
        neighbors = landmark_knn(cloud, landmarks, params.k_witness)
    ords, dists = neighbors.ordinals, neighbors.distances
    width = ords.shape[1]
    blocks = [(np.arange(m, dtype=np.int64).reshape(-1, 1), np.zeros(m))]
    for size in range(2, min(params.max_dim + 2, width) + 1):
        keys, costs = [], []
        for positions in combinations(range(width), size):
            verts = np.sort(ords[:, positions], axis=1)
            keys.append(_encode(verts, m))
            # rows are sorted by distance, so the last position is the farthest
            costs.append(dists[:, positions[-1]])
        keys = np.concatenate(keys)
        costs = np.concatenate(costs)
        order = np.lexsort((costs, keys))
        keys, costs = keys[order], costs[order]
        first = np.ones(len(keys), dtype=bool)
        first[1:] = keys[1:] != keys[:-1]
        keys, costs = keys[first], costs[first]
        verts = np.empty((len(keys), size), dtype=np.int64)
        rest = keys.copy()
        for c in range(size - 1, -1, -1):
            verts[:, c] = rest % m
            rest //= m
        blocks.append((verts, costs))
    return assemble(blocks, m, cloud.points[landmarks.indices])
