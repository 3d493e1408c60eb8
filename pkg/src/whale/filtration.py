"""Filtered simplicial complexes shared by the witness and Rips builders."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, NamedTuple

import numpy as np

from .errors import InvalidFiltration

__all__ = ["FilteredSimplex", "SimplicialFiltration", "assemble"]


class FilteredSimplex(NamedTuple):
    vertices: tuple
    value: float

    @property
    def dim(self) -> int:
        return len(self.vertices) - 1


def _sort_key(simplex, value):
    return (value, len(simplex), simplex)


@dataclass(frozen=True)
class SimplicialFiltration:
    """Simplices sorted by ``(value, dimension, vertices)``.

    ``vertex_coords`` optionally holds the coordinates of vertex ordinals so
    that diagrams computed from this filtration can be localised in space.
    """

    simplices: tuple
    values: np.ndarray
    landmark_count: int
    vertex_coords: np.ndarray | None = field(default=None, compare=False)

    @classmethod
    def from_mapping(cls, values_by_simplex, landmark_count, vertex_coords=None):
        """Build from ``{sorted vertex tuple: value}``, sorting as required."""
        items = sorted(values_by_simplex.items(), key=lambda kv: _sort_key(kv[0], kv[1]))
        simplices = tuple(s for s, _ in items)
        values = np.array([v for _, v in items], dtype=np.float64)
        return cls(simplices, values, int(landmark_count), vertex_coords)

    def __len__(self):
        return len(self.simplices)

    def __iter__(self) -> Iterator[FilteredSimplex]:
        for s, v in zip(self.simplices, self.values):
            yield FilteredSimplex(s, float(v))

    @property
    def max_simplex_dim(self) -> int:
        return max((len(s) - 1 for s in self.simplices), default=-1)

    def count_by_dim(self) -> dict:
        counts: dict = {}
        for s in self.simplices:
            counts[len(s) - 1] = counts.get(len(s) - 1, 0) + 1
        return counts

    def validate(self) -> None:
        """Raise :class:`InvalidFiltration` unless the stored invariants hold."""
        seen = {}
        prev = None
        for s, v in zip(self.simplices, self.values):
            v = float(v)
            if len(s) == 0 or any(b <= a for a, b in zip(s, s[1:])):
                raise InvalidFiltration(f"vertices of {s} are not strictly increasing")
            if not v >= 0:
                raise InvalidFiltration(f"negative or NaN value {v} on {s}")
            if len(s) == 1 and v != 0.0:
                raise InvalidFiltration(f"vertex {s} enters at {v}, expected 0")
            key = _sort_key(s, v)
            if prev is not None and key <= prev:
                raise InvalidFiltration(f"{s} is out of order or duplicated")
            prev = key
            if len(s) > 1:
                for i in range(len(s)):
                    face = s[:i] + s[i + 1 :]
                    fv = seen.get(face)
                    if fv is None:
                        raise InvalidFiltration(f"face {face} of {s} is missing")
                    if fv > v:
                        raise InvalidFiltration(f"face {face} enters after {s}")
            seen[s] = v

    def dump(self, path) -> None:
        """Write one ``value dim v0 v1 [v2 ...]`` line per simplex."""
        with open(path, "w", encoding="ascii") as fh:
            for s, v in zip(self.simplices, self.values):
                fh.write(f"{float(v)!r} {len(s) - 1} {' '.join(map(str, s))}\n")


def assemble(blocks, landmark_count, vertex_coords=None) -> SimplicialFiltration:
    """Sort ``[(vertex array, values), ...]`` blocks into one filtration."""
    width = max(v.shape[1] for v, _ in blocks)
    verts = np.full((sum(len(v) for v, _ in blocks), width), -1, dtype=np.int64)
    values = np.empty(len(verts))
    dims = np.empty(len(verts), dtype=np.int64)
    at = 0
    for v, val in blocks:
        verts[at : at + len(v), : v.shape[1]] = v
        values[at : at + len(v)] = val
        dims[at : at + len(v)] = v.shape[1] - 1
        at += len(v)
    keys = [verts[:, c] for c in range(width - 1, -1, -1)] + [dims, values]
    order = np.lexsort(keys)
    verts, values, dims = verts[order], values[order], dims[order]
    simplices = tuple(tuple(row[: d + 1]) for row, d in zip(verts.tolist(), dims.tolist()))
    return SimplicialFiltration(simplices, values, int(landmark_count), vertex_coords)
