"""Gaussian kernel density with a Silverman bandwidth."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import config as numba_config
from numba import njit, prange

from .cloud import PointCloud
from .errors import DegenerateSpread, InvalidArgument

__all__ = ["DensityEstimate", "silverman_bandwidth", "kde_density", "estimate_density"]

AMBIENT_DIM = 3
MAX_REFERENCE = 20_000

# probing an old TBB install only produces a warning; try OpenMP first
numba_config.THREADING_LAYER_PRIORITY = ["omp", "tbb", "workqueue"]


@dataclass(frozen=True)
class DensityEstimate:
    bandwidth: float
    densities: np.ndarray
    reference_size: int

    def __post_init__(self):
        if not (self.bandwidth > 0 and math.isfinite(self.bandwidth)):
            raise InvalidArgument(f"bandwidth must be positive and finite, got {self.bandwidth}")
        d = np.asarray(self.densities, dtype=np.float64)
        d.flags.writeable = False
        object.__setattr__(self, "densities", d)

    def __len__(self):
        return len(self.densities)


def silverman_bandwidth(cloud: PointCloud) -> float:
    """Isotropic rule-of-thumb bandwidth for a 3D cloud.

    ``h = sigma * (4 / ((d + 2) n)) ** (1 / (d + 4))`` where ``sigma`` is the
    mean of the per-axis sample standard deviations (``ddof=1``).
    """
    n = cloud.n
    if n < 2:
        raise InvalidArgument("Silverman's rule needs at least two points")
    sd = cloud.points.std(axis=0, ddof=1)
    sigma = float(sd.mean())
    if sigma == 0.0:
        raise DegenerateSpread("all points are identical; bandwidth is undefined")
    d = AMBIENT_DIM
    return sigma * (4.0 / ((d + 2) * n)) ** (1.0 / (d + 4))


@njit(parallel=True, cache=True)
def _kernel_sums(queries, ref, inv_two_h2):
    out = np.empty(len(queries))
    for i in prange(len(queries)):
        qx, qy, qz = queries[i, 0], queries[i, 1], queries[i, 2]
        total = 0.0
        comp = 0.0
        for j in range(len(ref)):
            dx = qx - ref[j, 0]
            dy = qy - ref[j, 1]
            dz = qz - ref[j, 2]
            k = math.exp(-(dx * dx + dy * dy + dz * dz) * inv_two_h2)
            # Neumaier summation
            t = total + k
            if abs(total) >= k:
                comp += (total - t) + k
            else:
                comp += (k - t) + total
            total = t
        out[i] = total + comp
    return out


def kde_density(
    cloud: PointCloud,
    queries,
    bandwidth: float,
    max_reference: int = MAX_REFERENCE,
    seed: int = 0,
) -> DensityEstimate:
    """Evaluate the Gaussian KDE of ``cloud`` at ``queries``.

    Clouds larger than ``max_reference`` are summed over a seeded uniform
    subsample of that size.  Kernel sums are compensated, so reordering the
    reference points changes a density by at most a few ulps.
    """
    if not (bandwidth > 0 and math.isfinite(bandwidth)):
        raise InvalidArgument(f"bandwidth must be positive and finite, got {bandwidth}")
    q = np.asarray(queries, dtype=np.float64).reshape(-1, 3)
    ref = cloud.points
    if cloud.n > max_reference:
        rng = np.random.default_rng(seed)
        ref = ref[np.sort(rng.choice(cloud.n, size=max_reference, replace=False))]
    n_ref = len(ref)
    h2 = bandwidth * bandwidth
    norm = (2.0 * math.pi * h2) ** (-AMBIENT_DIM / 2.0)
    out = _kernel_sums(np.ascontiguousarray(q), np.ascontiguousarray(ref), 1.0 / (2.0 * h2))
    dens = norm * out / n_ref
    # a query far from every reference point underflows; keep densities positive
    dens = np.maximum(dens, np.finfo(np.float64).tiny)
    return DensityEstimate(float(bandwidth), dens, n_ref)


def estimate_density(cloud: PointCloud, max_reference: int = MAX_REFERENCE, seed: int = 0):
    """Silverman bandwidth plus KDE evaluated at every point of ``cloud``."""
    h = silverman_bandwidth(cloud)
    return kde_density(cloud, cloud.points, h, max_reference=max_reference, seed=seed)
