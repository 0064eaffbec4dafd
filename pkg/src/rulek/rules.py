"""Rule k, the marking process, local maxima and the grid-cell CDS.

Rule k: vertex i is excluded iff some set of k higher-ID neighbors of i
induces a connected subgraph and its closed neighborhoods jointly contain
N[i]. Every exclusion decision reads only the 2-hop neighborhood of i.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from rulek import _backend
from rulek.graph import UnitDiskGraph, component_count, is_dominating

DEFAULT_WORK_CAP = 10**6


@dataclass(frozen=True)
class CdsResult:
    members: frozenset[int]
    size: int
    excluded_count: int
    verified_dominating: bool | None = None
    verified_component_preserving: bool | None = None

    def to_dict(self) -> dict:
        return {
            "members": sorted(self.members),
            "c_k_size": self.size,
            "u_k": self.excluded_count,
            "verified_dominating": self.verified_dominating,
            "verified_component_preserving": self.verified_component_preserving,
        }


@dataclass(frozen=True)
class GridCdsResult:
    members: frozenset[int]
    cells_per_side: int
    cell_side: float
    all_cells_occupied: bool

    @property
    def size(self) -> int:
        return len(self.members)

    def to_dict(self) -> dict:
        return {
            "members": sorted(self.members),
            "size": self.size,
            "cells_per_side": self.cells_per_side,
            "cell_side": self.cell_side,
            "all_cells_occupied": self.all_cells_occupied,
        }


def _result(g: UnitDiskGraph, keep: np.ndarray, verify: bool) -> CdsResult:
    keep = keep.astype(bool)
    members = frozenset((np.flatnonzero(keep) + 1).tolist())
    dom = comp = None
    if verify:
        dom = is_dominating(g, keep)
        comp = component_count(g, keep) == component_count(g, np.ones(g.n, dtype=bool))
    return CdsResult(members, len(members), g.n - len(members), dom, comp)


def _check_k(k) -> int:
    if isinstance(k, bool) or int(k) != k or k < 1:
        raise ValueError(f"k: must be an integer >= 1, got {k!r}")
    return int(k)


def rule_k(
    g: UnitDiskGraph,
    k: int,
    *,
    at_most: bool = False,
    work_cap: int = DEFAULT_WORK_CAP,
    verify: bool = True,
) -> CdsResult:
    """Gateway set of Rule k applied to every vertex.

    With ``at_most=True`` a covering set of 1..k higher-ID neighbors also
    excludes a vertex. Raises WorkCapExceeded when one vertex's witness search
    examines more than `work_cap` subsets.
    """
    k = _check_k(k)
    cand = np.ones(g.n, dtype=np.uint8)
    keep = _backend.kernels.rule_k_keep(g.indptr, g.indices, k, at_most, cand, work_cap)
    return _result(g, keep, verify)


def rule_k_restricted(
    g: UnitDiskGraph,
    k: int,
    candidates,
    *,
    at_most: bool = False,
    work_cap: int = DEFAULT_WORK_CAP,
    verify: bool = True,
) -> CdsResult:
    """Rule k applied only to `candidates`, with witnesses drawn from them too.

    The coverage target is still the full closed neighborhood in `g`.
    """
    k = _check_k(k)
    cand = g.mask(candidates).astype(np.uint8)
    keep = _backend.kernels.rule_k_keep(g.indptr, g.indices, k, at_most, cand, work_cap)
    return _result(g, keep, verify)


def rule_k_naive(g: UnitDiskGraph, k: int, candidates=None, *, at_most: bool = False) -> frozenset[int]:
    """Reference Rule k by plain enumeration of neighbor subsets. Small graphs only."""
    k = _check_k(k)
    cand = set(range(1, g.n + 1)) if candidates is None else set(candidates)
    closed = {i: {i, *g.neighbors(i).tolist()} for i in range(1, g.n + 1)}
    sizes = range(1, k + 1) if at_most else (k,)
    members = set()
    for i in sorted(cand):
        higher = [u for u in sorted(closed[i]) if u > i and u in cand]
        excluded = False
        for size in sizes:
            for combo in combinations(higher, size):
                if not set().union(*(closed[u] for u in combo)) >= closed[i]:
                    continue
                if _induced_connected(closed, combo):
                    excluded = True
                    break
            if excluded:
                break
        if not excluded:
            members.add(i)
    return frozenset(members)


def _induced_connected(closed, verts) -> bool:
    verts = set(verts)
    start = next(iter(verts))
    seen = {start}
    stack = [start]
    while stack:
        a = stack.pop()
        for b in closed[a] & verts:
            if b not in seen:
                seen.add(b)
                stack.append(b)
    return seen == verts


def marking_process(g: UnitDiskGraph) -> set[int]:
    """Vertices having two neighbors that are not adjacent to each other."""
    marked = _backend.kernels.marking(g.indptr, g.indices)
    return set((np.flatnonzero(marked) + 1).tolist())


def local_maxima(g: UnitDiskGraph) -> set[int]:
    """Vertices whose ID exceeds every neighbor's ID."""
    deg = g.degrees
    ids = np.arange(g.n)
    top = np.full(g.n, -1, dtype=np.int64)
    nz = deg > 0
    # neighbor lists are sorted, so the last entry is the largest
    top[nz] = g.indices[g.indptr[1:][nz] - 1]
    return set((np.flatnonzero(top < ids) + 1).tolist())


def grid_cells(points: np.ndarray, side: float) -> tuple[np.ndarray, int, float]:
    """Cell number (row-major over x then y) of each point in the floor(3*side)^2 grid.

    Cells are half-open; points on the top or right boundary of the square go
    to the last cell of that row or column.
    """
    m = int(math.floor(3.0 * side))
    if m < 1:
        raise ValueError(f"side: grid construction needs side >= 1/3, got {side!r}")
    s = side / m
    cx = np.minimum(np.floor(points[:, 0] / s).astype(np.int64), m - 1)
    cy = np.minimum(np.floor(points[:, 1] / s).astype(np.int64), m - 1)
    return cx * m + cy, m, s


def grid_cds(g: UnitDiskGraph, rng: np.random.Generator) -> GridCdsResult:
    """One uniformly random vertex from every nonempty grid cell."""
    cells, m, s = grid_cells(g.instance.points, g.instance.side)
    order = np.argsort(cells, kind="stable")
    occupied, first, counts = np.unique(cells[order], return_index=True, return_counts=True)
    picks = rng.integers(0, counts)
    chosen = order[first + picks]
    return GridCdsResult(
        members=frozenset((chosen + 1).tolist()),
        cells_per_side=m,
        cell_side=s,
        all_cells_occupied=len(occupied) == m * m,
    )
