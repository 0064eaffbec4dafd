"""Exact minimum CDS for tiny graphs and the grid-based optimality bounds."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from rulek.graph import UnitDiskGraph
from rulek.rules import GridCdsResult

DEFAULT_N_CAP = 16
GRID_FACTOR = 81


@dataclass(frozen=True)
class OptResult:
    opt_size: int
    opt_witness: frozenset[int]
    grid_lower_bound: float | None = None

    def to_dict(self) -> dict:
        return {
            "opt_size": self.opt_size,
            "opt_witness": sorted(self.opt_witness),
            "grid_lower_bound": self.grid_lower_bound,
        }


class _MaskGraph:
    """Graph over bit positions 0..n-1 with closed-neighborhood bitmasks."""

    def __init__(self, g: UnitDiskGraph):
        self.n = g.n
        self.closed = []
        for i in range(1, g.n + 1):
            m = 1 << (i - 1)
            for j in g.neighbors(i).tolist():
                m |= 1 << (j - 1)
            self.closed.append(m)
        self.full = (1 << g.n) - 1
        self.total_components = self.components(self.full)

    def components(self, subset: int) -> int:
        count = 0
        rest = subset
        while rest:
            seed = rest & -rest
            comp = seed
            frontier = seed
            while frontier:
                grow = 0
                while frontier:
                    low = frontier & -frontier
                    grow |= self.closed[low.bit_length() - 1]
                    frontier ^= low
                grow &= subset & ~comp
                comp |= grow
                frontier = grow
            rest &= ~comp
            count += 1
        return count

    def dominates(self, subset: int) -> bool:
        hit = 0
        rest = subset
        while rest:
            low = rest & -rest
            hit |= self.closed[low.bit_length() - 1]
            rest ^= low
        return hit == self.full

    def is_cds(self, subset: int) -> bool:
        return self.dominates(subset) and self.components(subset) == self.total_components


def _check_cap(g: UnitDiskGraph, n_cap: int) -> None:
    if g.n < 1:
        raise ValueError("n: the graph has no vertices")
    if g.n > n_cap:
        raise ValueError(f"n: exhaustive search is capped at n <= {n_cap}, got n = {g.n}")


def min_cds_bruteforce(g: UnitDiskGraph, n_cap: int = DEFAULT_N_CAP) -> OptResult:
    """Minimum CDS by trying subsets in order of size, then lexicographically."""
    _check_cap(g, n_cap)
    mg = _MaskGraph(g)
    for size in range(1, g.n + 1):
        for combo in combinations(range(g.n), size):
            mask = 0
            for v in combo:
                mask |= 1 << v
            if mg.is_cds(mask):
                return OptResult(size, frozenset(v + 1 for v in combo))
    raise AssertionError("the full vertex set is always a CDS")


def min_cds_bitmask(g: UnitDiskGraph, n_cap: int = DEFAULT_N_CAP) -> OptResult:
    """Second exhaustive search, walking every bitmask 1..2^n - 1 in increasing order.

    Ties at minimum size are broken toward the lexicographically smallest
    sorted ID tuple so the witness is comparable with min_cds_bruteforce.
    """
    _check_cap(g, n_cap)
    mg = _MaskGraph(g)
    best = None
    best_key = None
    for mask in range(1, 1 << g.n):
        size = mask.bit_count()
        if best is not None and size > len(best_key):
            continue
        if not mg.is_cds(mask):
            continue
        key = tuple(v for v in range(g.n) if mask >> v & 1)
        if best_key is None or (len(key), key) < (len(best_key), best_key):
            best, best_key = mask, key
    return OptResult(len(best_key), frozenset(v + 1 for v in best_key))


def grid_hits(g: UnitDiskGraph, grid: GridCdsResult) -> np.ndarray:
    """For every vertex v, the number of grid members within distance 1 of v."""
    member = g.mask(grid.members).astype(np.int32)
    return g.csr() @ member + member


def factor81_check(g: UnitDiskGraph, grid: GridCdsResult) -> bool:
    """Every closed unit disk around a vertex holds at most 81 grid members."""
    if not grid.members:
        return True
    return bool(grid_hits(g, grid).max() <= GRID_FACTOR)


def opt_bounds(g: UnitDiskGraph, grid: GridCdsResult, opt: OptResult | None = None) -> dict:
    """Lower bound |C_rand| / 81 on the minimum CDS, checked against `opt` if given."""
    bound = grid.size / GRID_FACTOR
    report = {
        "grid_size": grid.size,
        "grid_lower_bound": bound,
        "ell_sq_over_10": g.instance.side**2 / 10.0,
    }
    if opt is not None:
        holds = opt.opt_size >= bound
        report["opt_size"] = opt.opt_size
        report["bound_holds"] = holds
        report["opt_below_tenth_ell_sq"] = opt.opt_size < g.instance.side**2 / 10.0
        if not holds:
            raise AssertionError(
                f"minimum CDS size {opt.opt_size} is below the grid bound {bound:.4f}"
            )
    return report
