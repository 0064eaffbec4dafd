"""Unit disk graphs over a labelled point set.

Vertex IDs are the 1-based positions of the points in the instance; the
adjacency itself is stored 0-based in CSR form (``indptr``/``indices``) with
every neighbor list sorted ascending, so ID order and index order agree.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from rulek import _backend


@dataclass(frozen=True, eq=False)
class Instance:
    points: np.ndarray  # shape (n, 2); row i holds vertex ID i + 1
    side: float

    def __post_init__(self):
        pts = np.ascontiguousarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError(f"points: expected an (n, 2) array, got shape {pts.shape}")
        if pts.shape[0] < 1:
            raise ValueError("points: an instance needs at least one point")
        if not math.isfinite(self.side) or self.side <= 0:
            raise ValueError(f"side: must be a positive finite number, got {self.side!r}")
        if not np.isfinite(pts).all():
            raise ValueError("points: coordinates must be finite")
        outside = np.flatnonzero(((pts < 0) | (pts > self.side)).any(axis=1))
        if len(outside):
            i = int(outside[0])
            raise ValueError(
                f"points: point {i + 1} at {tuple(pts[i])} lies outside [0, {self.side}]^2"
            )
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "side", float(self.side))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    def to_dict(self) -> dict:
        return {"side": self.side, "points": self.points.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "Instance":
        if not isinstance(data, dict):
            raise ValueError("instance: expected a JSON object")
        for key in ("side", "points"):
            if key not in data:
                raise ValueError(f"{key}: missing from instance file")
        side = data["side"]
        if isinstance(side, bool) or not isinstance(side, (int, float)):
            raise ValueError(f"side: expected a number, got {side!r}")
        try:
            pts = np.array(data["points"], dtype=float)
        except (TypeError, ValueError) as exc:
            raise ValueError(f"points: not a list of [x, y] pairs ({exc})") from None
        if pts.size == 0:
            pts = pts.reshape(0, 2)
        return cls(pts, float(side))


def read_instance(path) -> Instance:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValueError(f"instance: {path} is not valid JSON ({exc.msg})") from None
    return Instance.from_dict(data)


def write_instance(inst: Instance, path) -> None:
    Path(path).write_text(json.dumps(inst.to_dict()) + "\n", encoding="utf-8")


@dataclass(frozen=True, eq=False)
class UnitDiskGraph:
    instance: Instance
    indptr: np.ndarray
    indices: np.ndarray
    _csr: csr_matrix | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.instance.n

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def edge_count(self) -> int:
        return len(self.indices) // 2

    def neighbors(self, i: int) -> np.ndarray:
        """Open neighborhood of vertex `i` as ascending 1-based IDs."""
        self._check_id(i)
        return self.indices[self.indptr[i - 1] : self.indptr[i]] + 1

    @property
    def adjacency(self) -> list[list[int]]:
        return [self.neighbors(i).tolist() for i in range(1, self.n + 1)]

    def csr(self) -> csr_matrix:
        if self._csr is None:
            data = np.ones(len(self.indices), dtype=np.int8)
            m = csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))
            object.__setattr__(self, "_csr", m)
        return self._csr

    def _check_id(self, i) -> None:
        if not 1 <= i <= self.n:
            raise IndexError(f"vertex ID {i} out of range 1..{self.n}")

    def mask(self, subset: Iterable[int]) -> np.ndarray:
        """Boolean membership vector (0-based) for a set of 1-based IDs."""
        ids = np.fromiter((int(v) for v in subset), dtype=np.int64)
        if len(ids) and (ids.min() < 1 or ids.max() > self.n):
            bad = ids[(ids < 1) | (ids > self.n)][0]
            raise IndexError(f"vertex ID {bad} out of range 1..{self.n}")
        m = np.zeros(self.n, dtype=bool)
        m[ids - 1] = True
        return m


def build_graph(inst: Instance) -> UnitDiskGraph:
    """Unit disk graph with the closed threshold d <= 1, via a unit cell grid."""
    indptr, indices = _backend.kernels.build_adjacency(
        np.ascontiguousarray(inst.points[:, 0]),
        np.ascontiguousarray(inst.points[:, 1]),
        inst.side,
    )
    indptr.setflags(write=False)
    indices.setflags(write=False)
    return UnitDiskGraph(inst, indptr, indices)


def closed_neighborhood(g: UnitDiskGraph, i: int) -> set[int]:
    return {i, *g.neighbors(i).tolist()}


def _as_mask(g: UnitDiskGraph, subset) -> np.ndarray:
    if isinstance(subset, np.ndarray) and subset.dtype == bool:
        if subset.shape != (g.n,):
            raise ValueError(f"mask: expected shape ({g.n},), got {subset.shape}")
        return subset
    return g.mask(subset)


def component_count(g: UnitDiskGraph, subset) -> int:
    """Number of connected components of the subgraph induced by `subset`."""
    m = _as_mask(g, subset)
    idx = np.flatnonzero(m)
    if len(idx) == 0:
        return 0
    if len(idx) == g.n:
        sub = g.csr()
    else:
        sub = g.csr()[idx][:, idx]
    ncomp, _ = connected_components(sub, directed=False)
    return int(ncomp)


def is_dominating(g: UnitDiskGraph, subset) -> bool:
    m = _as_mask(g, subset)
    hit = g.csr() @ m.astype(np.int32)
    return bool(np.all(m | (hit > 0)))


def is_cds(g: UnitDiskGraph, subset) -> bool:
    """Dominating, and inducing as many components as the whole graph has."""
    m = _as_mask(g, subset)
    if not is_dominating(g, m):
        return False
    return component_count(g, m) == component_count(g, np.ones(g.n, dtype=bool))


def brute_force_adjacency(inst: Instance) -> list[list[int]]:
    """All-pairs reference adjacency (1-based IDs); quadratic, for testing."""
    pts = inst.points
    n = len(pts)
    d2 = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
    out = []
    for i in range(n):
        row = np.flatnonzero(d2[i] <= 1.0)
        out.append([int(j) + 1 for j in row if j != i])
    return out
