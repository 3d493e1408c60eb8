"""Landmark selection: random, density-only, hybrid greedy, and cycle-aware.

The hybrid sampler scores a candidate ``x`` by

    s(x) = d(x, L) * (1 / (rho(x) + eps)) ** alpha

where ``L`` is the current landmark set and ``rho`` the kernel density.  The
candidates come from a pool of ``ceil(c * m * ln n)`` points drawn with
probability proportional to ``1 / (rho + eps)``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .cloud import PointCloud
from .density import DensityEstimate
from .errors import InvalidArgument

__all__ = [
    "METHODS",
    "LandmarkSet",
    "HybridParams",
    "AutoMParams",
    "CycleAwareParams",
    "FULL_AUTO_M",
    "FAST_AUTO_M",
    "auto_m",
    "candidate_pool_size",
    "select_random",
    "select_density",
    "select_hybrid",
    "select_cycle_aware",
]

METHODS = ("random", "density", "hybrid", "cycle_aware")


@dataclass(frozen=True)
class LandmarkSet:
    indices: np.ndarray
    method: str
    selection_seconds: float = 0.0
    pool_size: int | None = field(default=None, compare=False)

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64).reshape(-1)
        if len(np.unique(idx)) != len(idx):
            raise InvalidArgument("landmark indices must be distinct")
        if self.method not in METHODS:
            raise InvalidArgument(f"unknown selection method {self.method!r}")
        idx.flags.writeable = False
        object.__setattr__(self, "indices", idx)

    def __len__(self):
        return len(self.indices)

    @property
    def m(self) -> int:
        return len(self.indices)

    def witnesses(self, n: int) -> np.ndarray:
        """Indices of the points that are not landmarks, ascending."""
        mask = np.ones(n, dtype=bool)
        mask[self.indices] = False
        return np.flatnonzero(mask)


@dataclass(frozen=True)
class HybridParams:
    alpha: float = 0.5
    epsilon: float = 1e-9
    pool_constant: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not (0.0 <= self.alpha <= 1.0):
            raise InvalidArgument(f"alpha must lie in [0, 1], got {self.alpha}")
        if not (self.epsilon > 0):
            raise InvalidArgument(f"epsilon must be positive, got {self.epsilon}")
        if not (self.pool_constant > 0):
            raise InvalidArgument(f"pool_constant must be positive, got {self.pool_constant}")


@dataclass(frozen=True)
class AutoMParams:
    beta: float
    gamma: float
    m_min: int
    m_max: int

    def __post_init__(self):
        if not self.beta > 0:
            raise InvalidArgument(f"beta must be positive, got {self.beta}")
        if not (0.0 < self.gamma < 1.0):
            raise InvalidArgument(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.m_min > self.m_max:
            raise InvalidArgument(f"m_min ({self.m_min}) exceeds m_max ({self.m_max})")


FULL_AUTO_M = AutoMParams(41.0, 0.27, 400, 2400)
FAST_AUTO_M = AutoMParams(43.0, 0.26, 500, 2200)


@dataclass(frozen=True)
class CycleAwareParams:
    lifetime_threshold: float = 0.0
    reserve_fraction: float = 0.1
    locality_radius: float = 0.05

    def __post_init__(self):
        if not self.lifetime_threshold >= 0:
            raise InvalidArgument(f"lifetime_threshold must be >= 0, got {self.lifetime_threshold}")
        if not (0.0 <= self.reserve_fraction <= 1.0):
            raise InvalidArgument(f"reserve_fraction must lie in [0, 1], got {self.reserve_fraction}")
        if not self.locality_radius > 0:
            raise InvalidArgument(f"locality_radius must be positive, got {self.locality_radius}")


def _round_half_away(x: float) -> int:
    return int(math.copysign(math.floor(abs(x) + 0.5), x))


def auto_m(n: int, params: AutoMParams = FULL_AUTO_M) -> int:
    """Landmark budget ``min(m_max, max(m_min, round(beta * n ** gamma)))``."""
    if n < 1:
        raise InvalidArgument(f"n must be positive, got {n}")
    raw = _round_half_away(params.beta * float(n) ** params.gamma)
    return min(params.m_max, max(params.m_min, raw))


def _check(cloud: PointCloud, m: int, densities: DensityEstimate | None = None):
    if cloud is None or cloud.n == 0:
        raise InvalidArgument("cannot select landmarks from an empty cloud")
    if int(m) != m or m < 1:
        raise InvalidArgument(f"m must be a positive integer, got {m}")
    if densities is not None and len(densities) != cloud.n:
        raise InvalidArgument(
            f"{len(densities)} densities for a cloud of {cloud.n} points"
        )
    return int(m)


def select_random(cloud: PointCloud, m: int, seed: int = 0) -> LandmarkSet:
    """``m`` indices drawn uniformly without replacement (all of them when m >= n)."""
    start = time.perf_counter()
    m = _check(cloud, m)
    if m >= cloud.n:
        idx = np.arange(cloud.n)
    else:
        idx = np.random.default_rng(seed).permutation(cloud.n)[:m]
    return LandmarkSet(idx, "random", time.perf_counter() - start)


def select_density(cloud: PointCloud, densities: DensityEstimate, m: int, seed: int = 0) -> LandmarkSet:
    """Sample without replacement with probability proportional to density times weight."""
    start = time.perf_counter()
    m = _check(cloud, m, densities)
    if m >= cloud.n:
        idx = np.arange(cloud.n)
    else:
        p = np.asarray(densities.densities) * cloud.weights
        idx = np.random.default_rng(seed).choice(cloud.n, size=m, replace=False, p=p / p.sum())
    return LandmarkSet(idx, "density", time.perf_counter() - start)


def candidate_pool_size(n: int, m: int, pool_constant: float) -> int:
    """``min(n, ceil(c * m * ln n))``; the whole cloud when that is smaller than ``m``."""
    size = min(n, math.ceil(pool_constant * m * math.log(n))) if n > 1 else 1
    return n if size < m else size


def _inverse_density(densities: DensityEstimate, epsilon: float) -> np.ndarray:
    return 1.0 / (np.asarray(densities.densities) + epsilon)


def _candidate_pool(cloud, densities, m, params):
    """Pool indices, ascending, so that ``argmax`` ties resolve to the lowest index."""
    size = candidate_pool_size(cloud.n, m, params.pool_constant)
    if size >= cloud.n:
        return np.arange(cloud.n)
    inv = _inverse_density(densities, params.epsilon)
    rng = np.random.default_rng(params.seed)
    pool = rng.choice(cloud.n, size=size, replace=False, p=inv / inv.sum())
    return np.sort(pool)


def _greedy(points, factor, count, nearest=None, taken=None):
    """Greedy maximiser of ``nearest * factor`` over ``points``.

    ``nearest`` holds distances to already chosen landmarks (``None`` when
    there are none yet, in which case the first pick maximises ``factor``).
    Returns positions into ``points`` and the updated nearest distances.
    """
    size = len(points)
    chosen = []
    alive = np.ones(size, dtype=bool) if taken is None else ~taken
    if nearest is None:
        if count == 0 or not alive.any():
            return chosen, None
        score = np.where(alive, factor, -np.inf)
        first = int(np.argmax(score))
        chosen.append(first)
        alive[first] = False
        diff = points - points[first]
        nearest = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    else:
        nearest = nearest.copy()
    while len(chosen) < count and alive.any():
        score = np.where(alive, nearest * factor, -np.inf)
        pick = int(np.argmax(score))
        chosen.append(pick)
        alive[pick] = False
        diff = points - points[pick]
        np.minimum(nearest, np.sqrt(np.einsum("ij,ij->i", diff, diff)), out=nearest)
    return chosen, nearest


def select_hybrid(
    cloud: PointCloud,
    densities: DensityEstimate,
    m: int,
    params: HybridParams = HybridParams(),
) -> LandmarkSet:
    """Greedy hybrid coverage/inverse-density selection over a candidate pool.

    Ties in the score go to the lowest point index.  With ``alpha = 0`` and a
    pool covering the whole cloud this is farthest-point (MaxMin) sampling
    started from index 0.
    """
    start = time.perf_counter()
    m = _check(cloud, m, densities)
    if m >= cloud.n:
        return LandmarkSet(np.arange(cloud.n), "hybrid", time.perf_counter() - start, cloud.n)
    pool = _candidate_pool(cloud, densities, m, params)
    factor = _inverse_density(densities, params.epsilon)[pool] ** params.alpha
    picks, _ = _greedy(cloud.points[pool], factor, m)
    return LandmarkSet(pool[picks], "hybrid", time.perf_counter() - start, len(pool))


def select_cycle_aware(
    cloud: PointCloud,
    densities: DensityEstimate,
    m: int,
    params: HybridParams,
    prior,
    cycle_params: CycleAwareParams = CycleAwareParams(),
) -> LandmarkSet:
    """Hybrid selection that first spends a reserved budget near persistent loops.

    ``prior`` is a :class:`~whale.persistence.PersistenceDiagram` carrying
    vertex coordinates.  Points within ``locality_radius`` of the birth-edge
    vertices of 1-dimensional features living longer than
    ``lifetime_threshold`` form the reserved region.  Without such features
    the result equals :func:`select_hybrid`.
    """
    start = time.perf_counter()
    m = _check(cloud, m, densities)
    reserve = math.floor(cycle_params.reserve_fraction * m)
    anchors = np.empty((0, 3))
    if reserve > 0 and prior is not None:
        anchors = prior.representatives(1, cycle_params.lifetime_threshold)
    if reserve == 0 or len(anchors) == 0 or m >= cloud.n:
        base = select_hybrid(cloud, densities, m, params)
        return LandmarkSet(base.indices, "cycle_aware", time.perf_counter() - start, base.pool_size)

    pool = _candidate_pool(cloud, densities, m, params)
    inv_alpha = _inverse_density(densities, params.epsilon) ** params.alpha

    # reserved phase: hybrid greedy restricted to the neighbourhood of the loops
    near = np.zeros(cloud.n, dtype=bool)
    for a in anchors:
        diff = cloud.points - a
        near |= np.einsum("ij,ij->i", diff, diff) <= cycle_params.locality_radius**2
    region = np.flatnonzero(near)
    picks, _ = _greedy(cloud.points[region], inv_alpha[region], min(reserve, len(region)))
    chosen = list(region[picks])

    # main sweep over the pool, seeded with distances to the reserved landmarks
    remaining = m - len(chosen)
    taken = np.isin(pool, chosen)
    if len(pool) - int(taken.sum()) < remaining:
        pool = np.arange(cloud.n)
        taken = np.isin(pool, chosen)
    pts = cloud.points[pool]
    nearest = np.full(len(pool), np.inf)
    for c in chosen:
        diff = pts - cloud.points[c]
        np.minimum(nearest, np.sqrt(np.einsum("ij,ij->i", diff, diff)), out=nearest)
    more, _ = _greedy(pts, inv_alpha[pool], remaining, nearest=nearest, taken=taken)
    chosen.extend(pool[more])
    return LandmarkSet(np.asarray(chosen), "cycle_aware", time.perf_counter() - start, len(pool))
