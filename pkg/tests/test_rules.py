import numpy as np
import pytest

from rulek import _backend
from rulek.errors import WorkCapExceeded
from rulek.graph import Instance, build_graph, component_count, is_cds
from rulek.rules import (
    grid_cds,
    grid_cells,
    local_maxima,
    marking_process,
    rule_k,
    rule_k_naive,
    rule_k_restricted,
)

from conftest import graph_of


def random_graphs(seed, count, max_n=30, sides=(1.05, 5.0)):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rng.integers(1, max_n + 1))
        side = float(rng.uniform(*sides))
        yield build_graph(Instance(rng.random((n, 2)) * side, side))


def test_singleton(single, backend):
    res = rule_k(single, 3)
    assert res.members == {1}
    assert res.size == 1 and res.excluded_count == 0


def test_k4_cluster(k4, backend):
    # vertex 1: {2, 3, 4} is higher, connected, and covers N[1] = {1, 2, 3, 4}
    res = rule_k(k4, 3)
    assert res.members == {2, 3, 4}
    assert res.excluded_count == 1
    assert res.verified_dominating and res.verified_component_preserving


def test_path_keeps_everything(path3, backend):
    assert rule_k(path3, 3).members == {1, 2, 3}


def test_rejects_bad_k(path3):
    for k in (0, -1, 1.5, True):
        with pytest.raises(ValueError, match="k"):
            rule_k(path3, k)


def test_at_most_variant_differs_from_exact(backend):
    # vertex 1 is covered by vertex 2 alone, but has only one higher neighbor
    g = graph_of([(5, 5), (5.1, 5)])
    assert rule_k(g, 3).members == {1, 2}
    assert rule_k(g, 3, at_most=True).members == {2}
    assert rule_k_naive(g, 3, at_most=True) == {2}


def test_restricted_examples(k4, backend):
    assert rule_k_restricted(k4, 3, {1, 2, 3, 4}).members == rule_k(k4, 3).members
    assert rule_k_restricted(k4, 3, set()).members == frozenset()
    assert rule_k_restricted(k4, 3, {1, 2, 3}).members == {1, 2, 3}
    assert rule_k_naive(k4, 3, {1, 2, 3}) == {1, 2, 3}


def test_restricted_size_identity(k4):
    res = rule_k_restricted(k4, 3, {1, 2})
    assert res.size + res.excluded_count == k4.n


@pytest.mark.parametrize("k", [1, 2, 3, 4])
@pytest.mark.parametrize("at_most", [False, True])
def test_pruned_search_equals_naive_enumeration(backend, k, at_most):
    rng = np.random.default_rng(100 + k)
    count = 150 if backend == "python" else 300
    for g in random_graphs(k * 7 + at_most, count):
        assert rule_k(g, k, at_most=at_most, verify=False).members == rule_k_naive(g, k, at_most=at_most)
        cand = set((np.flatnonzero(rng.random(g.n) < 0.7) + 1).tolist())
        got = rule_k_restricted(g, k, cand, at_most=at_most, verify=False).members
        assert got == rule_k_naive(g, k, cand, at_most=at_most)


def test_backends_agree_on_dense_graphs():
    if _backend.name != "cython":
        pytest.skip("compiled extension not built")
    from rulek import _ckernels, _pykernels

    for g in random_graphs(77, 20, max_n=400, sides=(2.0, 4.0)):
        ones = np.ones(g.n, dtype=np.uint8)
        for k in (3, 5):
            a = _ckernels.rule_k_keep(g.indptr, g.indices, k, False, ones, 10**6)
            b = _pykernels.rule_k_keep(g.indptr, g.indices, k, False, ones, 10**6)
            assert np.array_equal(a, b)
        assert np.array_equal(_ckernels.marking(g.indptr, g.indices), _pykernels.marking(g.indptr, g.indices))


def test_rule_k_is_cds_across_densities():
    rng = np.random.default_rng(5)
    checked = 0
    for _ in range(10_000):
        n = int(rng.integers(1, 61))
        side = float(rng.choice([1.2, 2.0, 3.5, 6.0, 10.0]))
        g = build_graph(Instance(rng.random((n, 2)) * side, side))
        k = int(rng.integers(1, 6))
        res = rule_k(g, k)
        assert res.verified_dominating and res.verified_component_preserving
        assert local_maxima(g) <= res.members
        checked += 1
    assert checked == 10_000


def test_deterministic(backend):
    for g in random_graphs(9, 20, max_n=80):
        assert rule_k(g, 3).members == rule_k(g, 3).members


def test_work_cap_reports_vertex(backend):
    g = build_graph(Instance(np.random.default_rng(3).random((60, 2)) * 1.5, 1.5))
    with pytest.raises(WorkCapExceeded) as info:
        rule_k(g, 3, work_cap=1)
    assert 1 <= info.value.vertex <= g.n
    assert "work cap" in str(info.value)


def test_marking_examples(path3, k4, single):
    assert marking_process(path3) == {2}
    assert len(marking_process(path3)) == 1
    assert marking_process(k4) == set()
    assert marking_process(single) == set()


def test_marking_matches_definition(backend):
    for g in random_graphs(31, 200, max_n=25):
        adj = [set(r) for r in g.adjacency]
        expected = {
            i for i in range(1, g.n + 1)
            if any(v not in adj[u - 1] for u in adj[i - 1] for v in adj[i - 1] if u != v)
        }
        assert marking_process(g) == expected


def test_local_maxima_examples(k4, far_pair, path3):
    assert local_maxima(k4) == {4}
    assert local_maxima(far_pair) == {1, 2}
    assert local_maxima(path3) == {3}


def test_local_maxima_contains_top_id():
    for g in random_graphs(4, 100, max_n=40):
        lm = local_maxima(g)
        assert g.n in lm
        for i in range(1, g.n + 1):
            assert (i in lm) == all(j < i for j in g.neighbors(i))


def test_grid_cell_counts():
    g = graph_of([(0.1, 0.1)], side=2.0)
    res = grid_cds(g, np.random.default_rng(0))
    assert res.cells_per_side == 6 and res.cells_per_side**2 == 36
    assert res.cell_side == pytest.approx(1 / 3)
    assert res.members == {1}
    assert not res.all_cells_occupied


def test_grid_boundary_points_go_to_last_cell():
    pts = np.array([[2.0, 2.0], [0.0, 0.0], [2.0, 0.0]])
    cells, m, _ = grid_cells(pts, 2.0)
    assert m == 6
    assert cells.tolist() == [35, 0, 30]


def test_grid_all_cells_occupied():
    m = 6
    s = 2.0 / m
    pts = [((a + 0.5) * s, (b + 0.5) * s) for a in range(m) for b in range(m)] + [(0.01, 0.01)]
    g = graph_of(pts, side=2.0)
    res = grid_cds(g, np.random.default_rng(1))
    assert res.all_cells_occupied
    assert res.size == 36
    assert is_cds(g, res.members)


def test_grid_one_member_per_cell_and_uniform_choice():
    rng = np.random.default_rng(8)
    g = build_graph(Instance(rng.random((400, 2)) * 3.0, 3.0))
    cells, m, _ = grid_cells(g.instance.points, 3.0)
    res = grid_cds(g, np.random.default_rng(0))
    picked = cells[np.array(sorted(res.members)) - 1]
    assert len(set(picked.tolist())) == len(picked) == len(np.unique(cells))
    assert res.size <= m * m


def test_grid_cds_when_connected_and_occupied():
    rng = np.random.default_rng(12)
    seen = 0
    for t in range(60):
        g = build_graph(Instance(rng.random((700, 2)) * 3.0, 3.0))
        res = grid_cds(g, np.random.default_rng(t))
        if res.all_cells_occupied and component_count(g, np.ones(g.n, bool)) == 1:
            assert is_cds(g, res.members)
            seen += 1
    assert seen > 50
