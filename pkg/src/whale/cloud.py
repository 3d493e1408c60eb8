"""Point clouds, volume grids and the synthetic benchmark generators.

Every generator is a pure function of its arguments: the same parameters and
seed give bit-identical coordinates.  Coordinates are normalised into the unit
cube with a single isotropic scale so that Euclidean geometry (and therefore
every distance computed downstream) is preserved up to that scale.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import EmptySelection, FormatError, InvalidArgument

__all__ = [
    "PointCloud",
    "VolumeGrid",
    "normalize_unit_cube",
    "gen_swiss_roll",
    "gen_torus",
    "gen_circle",
    "gen_gaussian_mixture",
    "gen_phantom",
    "nearest_rank_quantile",
    "volume_to_cloud",
    "read_cloud_csv",
    "write_cloud_csv",
    "read_volume",
    "write_volume",
]

VOLUME_MAGIC = b"WVOL"


@dataclass(frozen=True)
class PointCloud:
    """Coordinates in the unit cube with strictly positive weights.

    ``points`` has shape ``(n, 3)`` and ``weights`` shape ``(n,)``.
    """

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = np.ascontiguousarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise InvalidArgument(f"points must have shape (n, 3), got {pts.shape}")
        w = np.ascontiguousarray(self.weights, dtype=np.float64).reshape(-1)
        if len(pts) < 1:
            raise InvalidArgument("a point cloud needs at least one point")
        if len(w) != len(pts):
            raise InvalidArgument(f"{len(pts)} points but {len(w)} weights")
        if not np.all(np.isfinite(pts)):
            raise InvalidArgument("coordinates must be finite")
        if not (np.all(np.isfinite(w)) and np.all(w > 0)):
            raise InvalidArgument("weights must be strictly positive and finite")
        pts.flags.writeable = False
        w.flags.writeable = False
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    def __len__(self):
        return len(self.points)

    @property
    def n(self) -> int:
        return len(self.points)

    def subset(self, indices) -> "PointCloud":
        idx = np.asarray(indices, dtype=np.intp)
        return PointCloud(self.points[idx], self.weights[idx])

    @classmethod
    def from_raw(cls, coords, weights=None) -> "PointCloud":
        """Normalise raw coordinates into the unit cube; default weights are 1."""
        coords = np.asarray(coords, dtype=np.float64)
        if weights is None:
            weights = np.ones(len(coords))
        return cls(normalize_unit_cube(coords), weights)


@dataclass(frozen=True)
class VolumeGrid:
    """Dense scalar volume stored flat in x-fastest order."""

    dims: tuple
    spacing: tuple
    intensities: np.ndarray

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        spacing = tuple(float(s) for s in self.spacing)
        if len(dims) != 3 or any(d < 1 for d in dims):
            raise InvalidArgument(f"dims must be three positive integers, got {self.dims}")
        if len(spacing) != 3 or any(not (s > 0 and math.isfinite(s)) for s in spacing):
            raise InvalidArgument(f"spacing must be three positive reals, got {self.spacing}")
        vals = np.ascontiguousarray(self.intensities, dtype=np.float64).reshape(-1)
        if len(vals) != dims[0] * dims[1] * dims[2]:
            raise InvalidArgument(
                f"expected {dims[0] * dims[1] * dims[2]} intensities, got {len(vals)}"
            )
        if not np.all(np.isfinite(vals)) or np.any(vals < 0):
            raise InvalidArgument("intensities must be finite and non-negative")
        vals.flags.writeable = False
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "intensities", vals)

    @property
    def size(self) -> int:
        return len(self.intensities)

    def voxel_coordinates(self, flat_indices) -> np.ndarray:
        """Physical coordinates (index times spacing) of flat voxel indices."""
        flat = np.asarray(flat_indices, dtype=np.int64)
        nx, ny, _ = self.dims
        i = flat % nx
        j = (flat // nx) % ny
        k = flat // (nx * ny)
        return np.column_stack([i, j, k]).astype(np.float64) * np.asarray(self.spacing)


def normalize_unit_cube(coords) -> np.ndarray:
    """Map coordinates into ``[0, 1]^3`` with one isotropic affine map.

    The longest bounding-box side is scaled to length 1 and every axis is
    centred on 0.5; an axis with zero extent therefore lands on 0.5.  A cloud
    with zero extent on every axis collapses to the cube centre.
    """
    x = np.asarray(coords, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != 3 or len(x) == 0:
        raise InvalidArgument(f"coordinates must have shape (n, 3), got {x.shape}")
    lo = x.min(axis=0)
    hi = x.max(axis=0)
    extent = hi - lo
    scale = float(extent.max())
    if scale == 0.0:
        return np.full_like(x, 0.5)
    offset = 0.5 - 0.5 * extent / scale
    out = (x - lo) / scale + offset
    # clip guards against a one-ulp overshoot on the longest axis
    return np.clip(out, 0.0, 1.0)


def _check_count(n, name="n"):
    if int(n) != n or n < 1:
        raise InvalidArgument(f"{name} must be a positive integer, got {n}")
    return int(n)


def _check_noise(noise):
    if not (noise >= 0 and math.isfinite(noise)):
        raise InvalidArgument(f"noise must be a non-negative real, got {noise}")


def gen_swiss_roll(n: int, noise: float = 0.0, seed: int = 0) -> PointCloud:
    """Standard Swiss roll: ``t`` uniform in [1.5pi, 4.5pi], height uniform in [0, 21]."""
    n = _check_count(n)
    _check_noise(noise)
    rng = np.random.default_rng(seed)
    t = 1.5 * np.pi * (1.0 + 2.0 * rng.random(n))
    height = 21.0 * rng.random(n)
    pts = np.column_stack([t * np.cos(t), height, t * np.sin(t)])
    if noise > 0:
        pts = pts + noise * rng.standard_normal(pts.shape)
    return PointCloud(normalize_unit_cube(pts), np.ones(n))


def gen_torus(
    n: int,
    major_radius: float = 1.0,
    minor_radius: float = 0.35,
    noise: float = 0.0,
    seed: int = 0,
) -> PointCloud:
    """Torus in the xy-plane, uniform in both angles."""
    n = _check_count(n)
    _check_noise(noise)
    if not (0 < minor_radius < major_radius):
        raise InvalidArgument(
            f"need 0 < minor_radius < major_radius, got r={minor_radius}, R={major_radius}"
        )
    rng = np.random.default_rng(seed)
    u = 2.0 * np.pi * rng.random(n)
    v = 2.0 * np.pi * rng.random(n)
    ring = major_radius + minor_radius * np.cos(v)
    pts = np.column_stack([ring * np.cos(u), ring * np.sin(u), minor_radius * np.sin(v)])
    if noise > 0:
        pts = pts + noise * rng.standard_normal(pts.shape)
    return PointCloud(normalize_unit_cube(pts), np.ones(n))


def gen_circle(n: int, noise: float = 0.0, seed: int = 0) -> PointCloud:
    """Unit circle in the xy-plane, uniform in angle."""
    n = _check_count(n)
    _check_noise(noise)
    rng = np.random.default_rng(seed)
    u = 2.0 * np.pi * rng.random(n)
    pts = np.column_stack([np.cos(u), np.sin(u), np.zeros(n)])
    if noise > 0:
        pts = pts + noise * rng.standard_normal(pts.shape)
    return PointCloud(normalize_unit_cube(pts), np.ones(n))


def _place_centers(components, separation, rng, max_tries=10_000):
    # rejection sampling in a box that comfortably fits all centres
    side = separation * max(2.0, 2.0 * components ** (1.0 / 3.0))
    centers = []
    tries = 0
    while len(centers) < components:
        c = side * rng.random(3)
        if all(np.linalg.norm(c - o) >= separation for o in centers):
            centers.append(c)
            continue
        tries += 1
        if tries > max_tries:
            side *= 1.5
            tries = 0
    return np.array(centers)


def gen_gaussian_mixture(
    n: int,
    components: int = 5,
    separation: float = 2.0,
    seed: int = 0,
    scale: float | None = None,
) -> PointCloud:
    """Isotropic Gaussian blobs with well separated centres.

    Point ``j`` belongs to component ``j % components``.  ``scale`` is the
    per-axis standard deviation of each blob and defaults to a quarter of the
    separation.
    """
    n = _check_count(n)
    components = _check_count(components, "components")
    if components > n:
        raise InvalidArgument(f"components ({components}) exceeds n ({n})")
    if not (separation > 0 and math.isfinite(separation)):
        raise InvalidArgument(f"separation must be positive, got {separation}")
    if scale is None:
        scale = separation / 4.0
    rng = np.random.default_rng(seed)
    centers = _place_centers(components, separation, rng)
    labels = np.arange(n) % components
    pts = centers[labels] + scale * rng.standard_normal((n, 3))
    return PointCloud(normalize_unit_cube(pts), np.ones(n))


PHANTOM_LEVELS = (0.3, 0.6, 0.9)
PHANTOM_SEMI_AXES = (0.92, 0.78, 0.85)
PHANTOM_SHELL_SCALES = (1.0, 0.7, 0.4)
PHANTOM_NOISE = 0.05


def gen_phantom(dims=(64, 64, 64), seed: int = 0) -> VolumeGrid:
    """Three nested ellipsoids at intensities 0.3 / 0.6 / 0.9 plus uniform noise.

    Noise is drawn from ``U(-0.05, 0.05)`` and the result clipped to [0, 1].
    """
    dims = tuple(int(d) for d in dims)
    if len(dims) != 3 or any(d < 8 for d in dims):
        raise InvalidArgument(f"each phantom dimension must be >= 8, got {dims}")
    nx, ny, nz = dims
    # voxel centres in (-1, 1), x fastest
    axes = [(np.arange(d) + 0.5) / d * 2.0 - 1.0 for d in dims]
    z, y, x = np.meshgrid(axes[2], axes[1], axes[0], indexing="ij")
    a, b, c = PHANTOM_SEMI_AXES
    radius = np.sqrt((x / a) ** 2 + (y / b) ** 2 + (z / c) ** 2)
    vol = np.zeros_like(radius)
    for level, shell in zip(PHANTOM_LEVELS, PHANTOM_SHELL_SCALES):
        vol[radius <= shell] = level
    rng = np.random.default_rng(seed)
    vol = vol + PHANTOM_NOISE * (2.0 * rng.random(vol.shape) - 1.0)
    vol = np.clip(vol, 0.0, 1.0)
    return VolumeGrid(dims, (1.0, 1.0, 1.0), vol.reshape(-1))


def nearest_rank_quantile(values, q: float) -> float:
    """Nearest-rank empirical quantile: the ``ceil(q * N)``-th smallest value.

    ``q = 0`` returns the minimum.
    """
    if not (0.0 <= q <= 1.0):
        raise InvalidArgument(f"quantile must lie in [0, 1], got {q}")
    v = np.sort(np.asarray(values, dtype=np.float64).reshape(-1))
    if len(v) == 0:
        raise InvalidArgument("quantile of an empty array")
    rank = max(1, math.ceil(q * len(v)))
    return float(v[rank - 1])


def volume_to_cloud(
    vol: VolumeGrid,
    intensity_quantile: float = 0.75,
    max_points: int = 1_000_000,
    seed: int = 0,
) -> PointCloud:
    """Keep voxels brighter than a quantile, thin to ``max_points``, normalise.

    Weights are the retained intensities divided by their maximum.
    """
    if not (0.0 <= intensity_quantile < 1.0):
        raise InvalidArgument(f"intensity_quantile must lie in [0, 1), got {intensity_quantile}")
    if int(max_points) != max_points or max_points < 1:
        raise InvalidArgument(f"max_points must be a positive integer, got {max_points}")
    threshold = nearest_rank_quantile(vol.intensities, intensity_quantile)
    keep = np.flatnonzero(vol.intensities > threshold)
    if len(keep) == 0:
        raise EmptySelection(
            f"no voxel is brighter than the {intensity_quantile} quantile ({threshold})"
        )
    if len(keep) > max_points:
        rng = np.random.default_rng(seed)
        keep = np.sort(rng.permutation(keep)[: int(max_points)])
    coords = vol.voxel_coordinates(keep)
    intens = vol.intensities[keep]
    return PointCloud(normalize_unit_cube(coords), intens / intens.max())


# -- file formats -------------------------------------------------------------

CLOUD_HEADER = "x,y,z,weight"


def write_cloud_csv(cloud: PointCloud, path) -> None:
    data = np.column_stack([cloud.points, cloud.weights])
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(CLOUD_HEADER + "\n")
        for row in data:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def read_cloud_csv(path, normalize: bool = True) -> PointCloud:
    """Read an ``x,y,z,weight`` CSV.  Coordinates are re-normalised by default."""
    path = Path(path)
    rows = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header.replace(" ", "") != CLOUD_HEADER:
            raise FormatError(f"expected header {CLOUD_HEADER!r}, got {header!r}", path, 1)
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 4:
                raise FormatError(f"expected 4 fields, got {len(parts)}", path, lineno)
            try:
                rows.append([float(p) for p in parts])
            except ValueError as exc:
                raise FormatError(str(exc), path, lineno) from None
    if not rows:
        raise FormatError("no points", path)
    data = np.array(rows)
    coords = normalize_unit_cube(data[:, :3]) if normalize else data[:, :3]
    return PointCloud(coords, data[:, 3])


def write_volume(vol: VolumeGrid, path) -> None:
    with open(path, "wb") as fh:
        fh.write(VOLUME_MAGIC)
        fh.write(struct.pack("<3I", *vol.dims))
        fh.write(struct.pack("<3f", *vol.spacing))
        fh.write(vol.intensities.astype("<f4").tobytes())


def read_volume(path) -> VolumeGrid:
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < 28 or raw[:4] != VOLUME_MAGIC:
        raise FormatError("not a WVOL file (bad magic or truncated header)", path)
    dims = struct.unpack_from("<3I", raw, 4)
    spacing = struct.unpack_from("<3f", raw, 16)
    count = dims[0] * dims[1] * dims[2]
    body = raw[28:]
    if len(body) != 4 * count:
        raise FormatError(f"expected {count} float32 intensities, found {len(body) // 4}", path)
    intens = np.frombuffer(body, dtype="<f4").astype(np.float64)
    return VolumeGrid(dims, spacing, intens)
