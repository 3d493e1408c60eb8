"""Persistence diagrams by GF(2) boundary-matrix reduction, plus a small Rips reference.

The reduction is the standard column algorithm run one dimension at a time,
from the top dimension down, with clearing: a simplex that is the pivot of a
reduced column one dimension up is known to be positive, so its own column is
skipped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numba
import numpy as np
from numba.typed import List

from .cloud import PointCloud
from .errors import FormatError, InvalidArgument, InvalidFiltration, SampleSizeError
from .filtration import SimplicialFiltration, assemble

__all__ = [
    "Feature",
    "PersistenceDiagram",
    "compute_persistence",
    "rips_filtration",
    "rips_reference",
    "read_diagram_csv",
    "write_diagram_csv",
    "RIPS_SAMPLE_LIMIT",
]

RIPS_SAMPLE_LIMIT = 1500


class Feature(NamedTuple):
    dim: int
    birth: float
    death: float
    birth_vertices: tuple = ()

    @property
    def lifetime(self) -> float:
        return self.death - self.birth

    @property
    def essential(self) -> bool:
        return math.isinf(self.death)


@dataclass(frozen=True)
class PersistenceDiagram:
    """Features of every dimension, sorted by ``(dim, birth, death)``.

    ``zero_lifetime`` tallies the discarded ``birth == death`` pairs per
    dimension.  ``vertex_coords`` maps vertex ordinals of ``birth_vertices``
    back to coordinates when the source filtration provided them.
    """

    features: tuple
    zero_lifetime: dict = field(default_factory=dict, compare=False)
    vertex_coords: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        feats = tuple(sorted(self.features, key=lambda f: (f.dim, f.birth, f.death)))
        object.__setattr__(self, "features", feats)

    def __len__(self):
        return len(self.features)

    def in_dim(self, dim: int) -> list:
        return [f for f in self.features if f.dim == dim]

    def pairs(self, dim: int) -> np.ndarray:
        """``(k, 2)`` array of ``(birth, death)`` for one dimension."""
        rows = [(f.birth, f.death) for f in self.features if f.dim == dim]
        return np.array(rows, dtype=np.float64).reshape(-1, 2)

    def count(self, dim: int) -> int:
        return sum(1 for f in self.features if f.dim == dim)

    def essential_count(self, dim: int) -> int:
        return sum(1 for f in self.features if f.dim == dim and f.essential)

    def betti(self, dim: int, t: float) -> int:
        """Number of ``dim``-features alive at scale ``t`` (born ``<= t < death``)."""
        return sum(1 for f in self.features if f.dim == dim and f.birth <= t < f.death)

    def representatives(self, dim: int = 1, min_lifetime: float = 0.0) -> np.ndarray:
        """Coordinates of birth-simplex vertices of features with lifetime above a bound."""
        if self.vertex_coords is None:
            raise InvalidArgument("diagram carries no vertex coordinates")
        idx = sorted(
            {v for f in self.features if f.dim == dim and f.lifetime > min_lifetime for v in f.birth_vertices}
        )
        return np.asarray(self.vertex_coords)[np.asarray(idx, dtype=np.intp)].reshape(-1, 3)

    def restrict(self, max_dim: int) -> "PersistenceDiagram":
        return PersistenceDiagram(
            tuple(f for f in self.features if f.dim <= max_dim),
            {d: c for d, c in self.zero_lifetime.items() if d <= max_dim},
            self.vertex_coords,
        )


# -- reduction ------------------------------------------------------------------


def _index_by_dim(filtration: SimplicialFiltration):
    """Split the sorted filtration into per-dimension vertex arrays and values."""
    groups: dict = {}
    for pos, s in enumerate(filtration.simplices):
        groups.setdefault(len(s) - 1, []).append(pos)
    out = {}
    for dim, positions in groups.items():
        pos = np.asarray(positions, dtype=np.intp)
        verts = np.array([filtration.simplices[p] for p in positions], dtype=np.int64).reshape(len(pos), dim + 1)
        out[dim] = (verts, np.asarray(filtration.values, dtype=np.float64)[pos])
    return out


def _encode(verts: np.ndarray, base: int) -> np.ndarray:
    key = np.zeros(len(verts), dtype=np.int64)
    for c in range(verts.shape[1]):
        key = key * base + verts[:, c]
    return key


def _boundary_rows(by_dim, dim: int, base: int) -> np.ndarray:
    """Row indices (into dimension ``dim - 1`` order) of every ``dim``-simplex's faces."""
    verts, values = by_dim[dim]
    if dim - 1 not in by_dim:
        raise InvalidFiltration(f"{dim}-simplices present but no {dim - 1}-simplices")
    fverts, fvalues = by_dim[dim - 1]
    fkeys = _encode(fverts, base)
    order = np.argsort(fkeys, kind="stable")
    sorted_keys = fkeys[order]
    rows = np.empty((len(verts), dim + 1), dtype=np.int64)
    for drop in range(dim + 1):
        keep = [c for c in range(dim + 1) if c != drop]
        keys = _encode(verts[:, keep], base)
        loc = np.searchsorted(sorted_keys, keys)
        loc = np.minimum(loc, len(sorted_keys) - 1)
        found = sorted_keys[loc] == keys
        if not np.all(found):
            bad = int(np.flatnonzero(~found)[0])
            face = tuple(int(v) for v in verts[bad, keep])
            raise InvalidFiltration(f"face {face} of {tuple(int(v) for v in verts[bad])} is missing")
        r = order[loc]
        if np.any(fvalues[r] > values):
            bad = int(np.flatnonzero(fvalues[r] > values)[0])
            raise InvalidFiltration(f"a face of {tuple(int(v) for v in verts[bad])} enters after it")
        rows[:, drop] = r
    return rows


@numba.njit(cache=True)
def _xor_into(a, la, b, out):
    # symmetric difference of sorted a[:la] and b into out; returns its length
    i = j = k = 0
    lb = len(b)
    while i < la and j < lb:
        if a[i] < b[j]:
            out[k] = a[i]
            i += 1
            k += 1
        elif a[i] > b[j]:
            out[k] = b[j]
            j += 1
            k += 1
        else:
            i += 1
            j += 1
    while i < la:
        out[k] = a[i]
        i += 1
        k += 1
    while j < lb:
        out[k] = b[j]
        j += 1
        k += 1
    return k


@numba.njit(cache=True)
def _reduce_columns(rows, cleared, n_rows):
    # columns are sorted row arrays; the pivot ("low") is the last entry
    owner = np.full(n_rows, -1, dtype=np.int64)
    slot = np.full(n_rows, -1, dtype=np.int64)
    store = List()
    store.append(np.empty(0, dtype=np.int64))
    cap = 64
    buf = np.empty(cap, dtype=np.int64)
    tmp = np.empty(cap, dtype=np.int64)
    for j in range(rows.shape[0]):
        if cleared[j]:
            continue
        width = rows.shape[1]
        srt = np.sort(rows[j])
        for c in range(width):
            buf[c] = srt[c]
        length = width
        while length > 0:
            low = buf[length - 1]
            if owner[low] < 0:
                owner[low] = j
                slot[low] = len(store)
                store.append(buf[:length].copy())
                break
            other = store[slot[low]]
            need = length + len(other)
            if need > cap:
                while cap < need:
                    cap *= 2
                grown = np.empty(cap, dtype=np.int64)
                grown[:length] = buf[:length]
                buf = grown
                tmp = np.empty(cap, dtype=np.int64)
            length = _xor_into(buf, length, other, tmp)
            buf, tmp = tmp, buf
    return owner


def _reduce_dimension(rows: np.ndarray, cleared: set, n_rows: int) -> dict:
    """Reduce the columns of one boundary matrix; return ``{pivot_row: column}``."""
    mask = np.zeros(len(rows), dtype=np.bool_)
    if cleared:
        mask[np.fromiter(cleared, dtype=np.int64)] = True
    owner = _reduce_columns(np.ascontiguousarray(rows, dtype=np.int64), mask, n_rows)
    hit = np.flatnonzero(owner >= 0)
    return dict(zip(hit.tolist(), owner[hit].tolist()))


def compute_persistence(filtration: SimplicialFiltration, max_dim: int | None = None) -> PersistenceDiagram:
    """Persistence pairs of a filtration over GF(2).

    Features in dimensions above ``max_dim`` are dropped (default: keep every
    dimension present).  Pairs with ``birth == death`` are discarded and
    tallied in ``zero_lifetime``.
    """
    if len(filtration) == 0:
        return PersistenceDiagram((), {}, filtration.vertex_coords)
    for s in filtration.simplices:
        if any(b <= a for a, b in zip(s, s[1:])):
            raise InvalidFiltration(f"vertices of {s} are not strictly increasing")
    by_dim = _index_by_dim(filtration)
    top = max(by_dim)
    if max_dim is None:
        max_dim = top
    if 0 not in by_dim:
        raise InvalidFiltration("filtration has no vertices")
    vert_values = by_dim[0][1]
    if np.any(vert_values != 0):
        raise InvalidFiltration("vertices must enter at value 0")
    base = int(max(int(v.max()) for v, _ in by_dim.values())) + 1

    features = []
    zero = {}
    # rows killed from one dimension up, and columns that are negative
    killed: dict = {d: set() for d in by_dim}
    negative: dict = {d: set() for d in by_dim}
    for dim in range(top, 0, -1):
        if dim not in by_dim:
            continue
        rows = _boundary_rows(by_dim, dim, base)
        pivots = _reduce_dimension(rows, killed[dim], len(by_dim[dim - 1][0]))
        killed[dim - 1] = set(pivots)
        negative[dim] = set(pivots.values())
        if dim - 1 > max_dim:
            continue
        bverts, bvals = by_dim[dim - 1]
        dvals = by_dim[dim][1]
        for r, j in pivots.items():
            b, d = float(bvals[r]), float(dvals[j])
            if d > b:
                features.append(Feature(dim - 1, b, d, tuple(int(v) for v in bverts[r])))
            else:
                zero[dim - 1] = zero.get(dim - 1, 0) + 1

    # essential classes: positive simplices that nothing kills
    for dim in range(0, min(top, max_dim) + 1):
        if dim not in by_dim:
            continue
        verts, vals = by_dim[dim]
        for r in range(len(verts)):
            if r in negative[dim] or r in killed[dim]:
                continue
            features.append(Feature(dim, float(vals[r]), math.inf, tuple(int(v) for v in verts[r])))
    return PersistenceDiagram(tuple(features), zero, filtration.vertex_coords)


# -- Vietoris-Rips reference ---------------------------------------------------------


def pairwise_distances(points) -> np.ndarray:
    p = np.asarray(points, dtype=np.float64)
    diff = p[:, None, :] - p[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def enclosing_radius(points) -> float:
    """Largest distance from a point to the centroid."""
    p = np.asarray(points, dtype=np.float64)
    diff = p - p.mean(axis=0)
    return float(np.sqrt(np.einsum("ij,ij->i", diff, diff)).max())


def rips_filtration(points, max_dim: int = 1, cap: float | None = None) -> SimplicialFiltration:
    """Vietoris-Rips filtration with simplices up to dimension ``max_dim + 1``.

    A simplex enters at its longest edge.  Edges longer than ``cap`` (default:
    the enclosing radius) are left out.
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    n = len(pts)
    dist = pairwise_distances(pts)
    if cap is None:
        cap = enclosing_radius(pts)
    adj = dist <= cap
    np.fill_diagonal(adj, False)
    blocks = [(np.arange(n, dtype=np.int64).reshape(-1, 1), np.zeros(n))]
    iu, ju = np.nonzero(np.triu(adj, 1))
    blocks.append((np.column_stack([iu, ju]), dist[iu, ju]))
    # each level extends a simplex by a common neighbour above its largest vertex
    level = np.column_stack([iu, ju])
    level_vals = dist[iu, ju]
    upper = np.triu(adj, 1)
    for _ in range(max_dim):
        if len(level) == 0:
            break
        common = upper[level[:, 0]]
        for c in range(1, level.shape[1]):
            common = common & upper[level[:, c]]
        rows, new = np.nonzero(common)
        if len(rows) == 0:
            break
        nxt = np.column_stack([level[rows], new])
        vals = level_vals[rows]
        for c in range(level.shape[1]):
            vals = np.maximum(vals, dist[level[rows, c], new])
        blocks.append((nxt, vals))
        level, level_vals = nxt, vals
    return assemble(blocks, n, pts)


def rips_reference(
    cloud: PointCloud,
    sample_size: int = 300,
    max_dim: int = 1,
    seed: int = 0,
    cap: float | None = None,
) -> PersistenceDiagram:
    """Exact Rips diagram of a seeded uniform subsample of ``cloud``."""
    if max_dim not in (0, 1, 2):
        raise InvalidArgument(f"max_dim must be 0, 1 or 2, got {max_dim}")
    if sample_size < 1:
        raise InvalidArgument(f"sample_size must be positive, got {sample_size}")
    if sample_size > RIPS_SAMPLE_LIMIT:
        raise SampleSizeError(
            f"Rips reference limited to {RIPS_SAMPLE_LIMIT} samples, got {sample_size}"
        )
    rng = np.random.default_rng(seed)
    if sample_size >= cloud.n:
        idx = np.arange(cloud.n)
    else:
        idx = np.sort(rng.choice(cloud.n, size=sample_size, replace=False))
    filt = rips_filtration(cloud.points[idx], max_dim=max_dim, cap=cap)
    return compute_persistence(filt, max_dim=max_dim)


# -- diagram files --------------------------------------------------------------

DIAGRAM_HEADER = "dim,birth,death"


def write_diagram_csv(diagram: PersistenceDiagram, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(DIAGRAM_HEADER + "\n")
        for f in diagram.features:
            death = "inf" if f.essential else repr(float(f.death))
            fh.write(f"{f.dim},{float(f.birth)!r},{death}\n")


def read_diagram_csv(path) -> PersistenceDiagram:
    path = Path(path)
    feats = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header.replace(" ", "") != DIAGRAM_HEADER:
            raise FormatError(f"expected header {DIAGRAM_HEADER!r}, got {header!r}", path, 1)
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = [p.strip() for p in line.split(",")]
            if len(parts) != 3:
                raise FormatError(f"expected 3 fields, got {len(parts)}", path, lineno)
            try:
                dim = int(parts[0])
                birth = float(parts[1])
                death = math.inf if parts[2].lower() in ("inf", "+inf", "infinity") else float(parts[2])
            except ValueError as exc:
                raise FormatError(str(exc), path, lineno) from None
            if dim < 0 or not math.isfinite(birth) or math.isnan(death) or death < birth:
                raise FormatError(f"invalid feature {line!r}", path, lineno)
            feats.append(Feature(dim, birth, death))
    return PersistenceDiagram(tuple(feats))
