from itertools import combinations

import numpy as np
import pytest

from rulek.graph import Instance, build_graph, is_cds
from rulek.oracle import (
    factor81_check,
    grid_hits,
    min_cds_bitmask,
    min_cds_bruteforce,
    opt_bounds,
)
from rulek.rules import GridCdsResult, grid_cds, rule_k

from conftest import graph_of


def test_examples(path3, far_pair, k4):
    assert (min_cds_bruteforce(path3).opt_size, min_cds_bruteforce(path3).opt_witness) == (1, {2})
    assert (min_cds_bruteforce(far_pair).opt_size, min_cds_bruteforce(far_pair).opt_witness) == (2, {1, 2})
    assert min_cds_bruteforce(k4).opt_size == 1
    assert min_cds_bruteforce(k4).opt_witness == {1}


def test_cap():
    g = build_graph(Instance(np.random.default_rng(0).random((20, 2)) * 3, 3.0))
    with pytest.raises(ValueError, match="16"):
        min_cds_bruteforce(g)
    with pytest.raises(ValueError, match="16"):
        min_cds_bitmask(g)


def test_optimum_is_minimal_and_agrees_across_search_orders():
    rng = np.random.default_rng(21)
    for _ in range(150):
        n = int(rng.integers(1, 11))
        g = build_graph(Instance(rng.random((n, 2)) * 3.0, 3.0))
        a = min_cds_bruteforce(g)
        b = min_cds_bitmask(g)
        assert a.opt_size == b.opt_size
        assert a.opt_witness == b.opt_witness
        assert is_cds(g, a.opt_witness)
        for smaller in combinations(range(1, n + 1), a.opt_size - 1):
            assert not is_cds(g, set(smaller))
        assert a.opt_size <= rule_k(g, 3).size


def test_factor81_examples():
    g = build_graph(Instance(np.random.default_rng(2).random((3000, 2)) * 4.0, 4.0))
    grid = grid_cds(g, np.random.default_rng(0))
    assert factor81_check(g, grid)
    assert grid_hits(g, grid).max() <= 81
    empty = GridCdsResult(frozenset(), 12, 1 / 3, False)
    assert factor81_check(g, empty)
    one = GridCdsResult(frozenset({1}), 12, 1 / 3, False)
    assert factor81_check(g, one)


def test_factor81_detects_crowding():
    # 82 coincident members would violate the per-disk limit
    g = graph_of([(1, 1)] * 82, side=2.0)
    crowd = GridCdsResult(frozenset(range(1, 83)), 6, 1 / 3, False)
    assert not factor81_check(g, crowd)


def test_opt_bounds():
    g = graph_of([(1, 1)], side=2.0)
    grid = GridCdsResult(frozenset(range(1, 37)), 6, 1 / 3, True)
    rep = opt_bounds(g, grid)
    assert rep["grid_lower_bound"] == pytest.approx(36 / 81)
    assert rep["grid_lower_bound"] == pytest.approx(0.444, abs=1e-3)
    assert "bound_holds" not in rep


def test_opt_bounds_with_optimum(path3):
    grid = grid_cds(path3, np.random.default_rng(0))
    rep = opt_bounds(path3, grid, min_cds_bruteforce(path3))
    assert rep["bound_holds"]
    assert rep["opt_below_tenth_ell_sq"] == (1 < 100 / 10)
