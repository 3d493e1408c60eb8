"""Coverage statistics of a landmark set and bottleneck distance between diagrams."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching
from scipy.spatial import cKDTree

from .cloud import PointCloud
from .errors import InvalidArgument
from .landmarks import LandmarkSet

__all__ = [
    "CoverageReport",
    "DEFAULT_COVERAGE_RADIUS",
    "landmark_distances",
    "coverage_quantile",
    "coverage_report",
    "bottleneck_distance",
]

DEFAULT_COVERAGE_RADIUS = 0.05


@dataclass(frozen=True)
class CoverageReport:
    cov_mean: float
    cov_mean_weighted: float
    cov_p95: float
    cov_p95_weighted: float
    cov_ratio: float
    reference_radius: float
    p: float = 0.95


def landmark_distances(cloud: PointCloud, landmarks: LandmarkSet) -> np.ndarray:
    """Exact Euclidean distance from every point to its nearest landmark."""
    if landmarks.m == 0:
        raise InvalidArgument("landmark set is empty")
    lpts = cloud.points[landmarks.indices]
    _, nearest = cKDTree(lpts).query(cloud.points, k=1)
    diff = cloud.points - lpts[np.asarray(nearest, dtype=np.intp)]
    d = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    d[landmarks.indices] = 0.0
    return d


def coverage_quantile(distances, p: float, weights=None) -> float:
    """Smallest attained distance ``r`` whose (weighted) CDF reaches ``p``."""
    if not (0.0 < p <= 1.0):
        raise InvalidArgument(f"p must lie in (0, 1], got {p}")
    d = np.asarray(distances, dtype=np.float64)
    order = np.argsort(d, kind="stable")
    if weights is None:
        # integer counts keep the rank exact
        rank = math.ceil(p * len(d) - 1e-9 * len(d))
        return float(d[order][max(rank, 1) - 1])
    w = np.asarray(weights, dtype=np.float64)[order]
    cum = np.cumsum(w)
    target = p * cum[-1]
    pos = int(np.searchsorted(cum, target * (1.0 - 1e-12), side="left"))
    return float(d[order][min(pos, len(d) - 1)])


def coverage_report(
    cloud: PointCloud,
    landmarks: LandmarkSet,
    p: float = 0.95,
    reference_radius: float = DEFAULT_COVERAGE_RADIUS,
) -> CoverageReport:
    """Unweighted and intensity-weighted coverage of ``cloud`` by ``landmarks``.

    ``cov_ratio`` is the normalised weight of points within
    ``reference_radius`` of a landmark.
    """
    if landmarks.m == 0:
        raise InvalidArgument("landmark set is empty")
    if not reference_radius > 0:
        raise InvalidArgument(f"reference_radius must be positive, got {reference_radius}")
    d = landmark_distances(cloud, landmarks)
    w = cloud.weights / cloud.weights.sum()
    return CoverageReport(
        cov_mean=float(d.mean()),
        cov_mean_weighted=float(np.dot(w, d)),
        cov_p95=coverage_quantile(d, p),
        cov_p95_weighted=coverage_quantile(d, p, w),
        cov_ratio=float(min(1.0, w[d <= reference_radius].sum())),
        reference_radius=float(reference_radius),
        p=float(p),
    )


# -- bottleneck distance ---------------------------------------------------------------


def _as_pairs(diagram, dim):
    if hasattr(diagram, "pairs"):
        return diagram.pairs(dim)
    return np.asarray(diagram, dtype=np.float64).reshape(-1, 2)


def _perfect_matching_exists(cost, half_a, half_b, r):
    na, nb = len(half_a), len(half_b)
    size = na + nb
    # left: a_0..a_{na-1}, then diagonal slots for b; right: b_0.., then slots for a
    rows, cols = [], []
    ai, bj = np.nonzero(cost <= r)
    rows.append(ai)
    cols.append(bj)
    ok_a = np.flatnonzero(half_a <= r)
    rows.append(ok_a)
    cols.append(nb + ok_a)
    ok_b = np.flatnonzero(half_b <= r)
    rows.append(na + ok_b)
    cols.append(ok_b)
    dr, dc = np.meshgrid(np.arange(nb), np.arange(na), indexing="ij")
    rows.append(na + dr.ravel())
    cols.append(nb + dc.ravel())
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    graph = csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(size, size))
    match = maximum_bipartite_matching(graph, perm_type="column")
    return bool(np.all(match >= 0))


def _finite_bottleneck(a: np.ndarray, b: np.ndarray) -> float:
    if len(a) == 0 and len(b) == 0:
        return 0.0
    half_a = (a[:, 1] - a[:, 0]) / 2.0
    half_b = (b[:, 1] - b[:, 0]) / 2.0
    if len(a) == 0:
        return float(half_b.max())
    if len(b) == 0:
        return float(half_a.max())
    cost = np.maximum(
        np.abs(a[:, None, 0] - b[None, :, 0]), np.abs(a[:, None, 1] - b[None, :, 1])
    )
    candidates = np.unique(np.concatenate([cost.ravel(), half_a, half_b]))
    lo, hi = 0, len(candidates) - 1
    # the largest candidate is always feasible: every point can go to the diagonal
    while lo < hi:
        mid = (lo + hi) // 2
        if _perfect_matching_exists(cost, half_a, half_b, candidates[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(candidates[lo])


def bottleneck_distance(a, b, dim: int = 1) -> float:
    """Exact bottleneck distance between the ``dim``-parts of two diagrams.

    Finite points are matched to each other or to the diagonal.  Essential
    points (infinite death) are matched among themselves by birth; if the two
    diagrams disagree on the number of essential points the distance is
    ``inf``.  ``a`` and ``b`` may be diagrams or ``(k, 2)`` arrays.
    """
    pa, pb = _as_pairs(a, dim), _as_pairs(b, dim)
    ess_a = np.isinf(pa[:, 1])
    ess_b = np.isinf(pb[:, 1])
    if ess_a.sum() != ess_b.sum():
        return math.inf
    ess_cost = 0.0
    if ess_a.any():
        ess_cost = float(np.max(np.abs(np.sort(pa[ess_a, 0]) - np.sort(pb[ess_b, 0]))))
    return max(ess_cost, _finite_bottleneck(pa[~ess_a], pb[~ess_b]))
