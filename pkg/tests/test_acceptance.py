"""Acceptance criteria, one test each, with a pass/fail line per criterion.

Run alone with ``pytest tests/test_acceptance.py``; the lines are printed in
the terminal summary.
"""
import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, graph_of
from rulek.experiments import (
    ExperimentConfig,
    degree_tail_check,
    derive_seed,
    estimate_km,
    generate_instance,
    km_bound,
    lemma1_suite,
    run_trial,
    sweep,
    theoretical_curves,
)
from rulek.geometry import Point
from rulek.graph import Instance, build_graph, is_cds
from rulek.oracle import min_cds_bitmask, min_cds_bruteforce, opt_bounds
from rulek.rules import grid_cds, local_maxima, marking_process, rule_k, rule_k_naive

pytestmark = pytest.mark.slow

MASTER_SEED = 20240601


def report(number, passed, detail):
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert passed, line


def test_criterion_1_lemma1_geometry():
    t0 = time.perf_counter()
    res = lemma1_suite(10_000, 5.0, pitch=0.005, seed=MASTER_SEED)
    elapsed = time.perf_counter() - t0
    ok = res["passed"] and elapsed < 60
    report(1, ok, f"10000 centers, distance failures {res['distance_failures']}, "
                  f"coverage failures {res['coverage_failures']}, {elapsed:.1f}s (< 60s)")


def test_criterion_2_local_cover_probability():
    t0 = time.perf_counter()
    p = Point(5.0, 5.0)
    parts = []
    ok = True
    for m in (1000, 3000, 5000):
        est = estimate_km(3, m, p, 10.0, 1000, MASTER_SEED + m, mode="sufficient")
        floor = max(0.0, km_bound(m)) - 2 * est.se
        ok &= est.frequency >= floor
        parts.append(f"m={m}: {est.frequency:.4f} >= {floor:.4f}")
    assert km_bound(5000) == pytest.approx(0.9854, abs=1e-4)
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 300
    report(2, ok, "; ".join(parts) + f"; {elapsed:.1f}s (< 300s)")


def test_criterion_3_local_maxima_lower_bound():
    n, ell, trials = 2000, 15.0, 200
    counts = []
    inclusion = True
    for t in range(trials):
        g = build_graph(generate_instance(n, ell, derive_seed(MASTER_SEED, n, ell, t)))
        lm = local_maxima(g)
        ck = rule_k(g, 3, verify=False)
        inclusion &= lm <= ck.members
        counts.append(len(lm))
    counts = np.array(counts, dtype=float)
    mean = counts.mean()
    se = counts.std(ddof=1) / math.sqrt(trials)
    bound = theoretical_curves(n, ell)["l_bound"]
    ok = mean >= bound - 3 * se and inclusion
    report(3, ok, f"mean L {mean:.2f} (SE {se:.2f}) >= {bound:.2f} - 3 SE; L subset of C_k in every trial: {inclusion}")


CRITERION4 = dict(
    k=3,
    trials=100,
    master_seed=MASTER_SEED,
    family={"rule": "sqrt_n_over_log_n", "c": 1 / math.sqrt(10), "ns": [500, 1000, 2000, 4000]},
    toggles={"rule_k": True, "local_maxima": True},
)


@pytest.fixture(scope="module")
def criterion4_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("sweep_a")
    t0 = time.perf_counter()
    summary, records = sweep(ExperimentConfig(**CRITERION4), out)
    return summary, records, out, time.perf_counter() - t0


def test_criterion_4_ratio_stability(criterion4_run):
    summary, records, _, elapsed = criterion4_run
    ratios = []
    floors = True
    parts = []
    for cell in summary["cells"]:
        st = cell["stats"]["c_k_over_ell_sq"]
        ratios.append(st["mean"])
        floors &= st["mean"] >= 0.25 - 2 * st["se"]
        parts.append(f"n={cell['n']}: {st['mean']:.3f}")
    spread = max(ratios) / min(ratios)
    all_cds = all(r.is_cds for r in records)
    ok = spread <= 3 and floors and elapsed < 900 and summary["failures"] == 0 and all_cds
    report(4, ok, "mean C_k/ell^2 " + ", ".join(parts)
           + f"; max/min {spread:.3f} (<= 3); floor 1/4 - 2 SE/ell^2 held: {floors}; {elapsed:.0f}s (< 900s)")


def test_criterion_5_degree_tail():
    est = degree_tail_check(2000, 15.0, 1, 2000, MASTER_SEED)
    ok = est.frequency <= est.bound
    report(5, ok, f"P(rho_1 < {est.extra['threshold']:.2f}) = {est.frequency:.4f} <= {est.bound:.4f}")


def test_criterion_6_grid_construction():
    cfg = ExperimentConfig(k=3, trials=500, master_seed=MASTER_SEED, schedule=[(2000, 5.0)],
                           toggles={"grid_cds": True})
    recs = [run_trial(cfg, 2000, 5.0, t) for t in range(500)]
    p_b = np.mean([r.b_event for r in recs])
    conditioned = [r for r in recs if r.b_event and r.component_count == 1]
    cds_ok = all(r.grid_is_cds for r in conditioned)
    f81 = all(r.factor81 for r in recs)
    sizes_ok = all(r.grid_size == 225 for r in recs if r.b_event)
    ok = p_b >= 0.95 and cds_ok and f81 and sizes_ok and len(conditioned) > 0
    report(6, ok, f"P(B) = {p_b:.3f} (>= 0.95); CDS given B and connected: "
                  f"{sum(r.grid_is_cds for r in conditioned)}/{len(conditioned)}; factor 81 held: {f81}")


def test_criterion_7_oracle_suite():
    t0 = time.perf_counter()
    rng = np.random.default_rng(MASTER_SEED)
    failures = {"a": 0, "b": 0, "c": 0, "d": 0, "e": 0}
    for t in range(500):
        n = int(rng.integers(1, 11))
        g = build_graph(Instance(rng.random((n, 2)) * 3.0, 3.0))
        ck = rule_k(g, 3)
        opt = min_cds_bruteforce(g)
        grid = grid_cds(g, np.random.default_rng([MASTER_SEED, t]))
        failures["a"] += not is_cds(g, ck.members)
        failures["b"] += not opt.opt_size <= ck.size
        failures["c"] += not opt_bounds(g, grid, opt)["bound_holds"]
        failures["d"] += min_cds_bitmask(g).opt_size != opt.opt_size
        failures["e"] += ck.members != rule_k_naive(g, 3)
    elapsed = time.perf_counter() - t0
    ok = not any(failures.values()) and elapsed < 300
    report(7, ok, "500 instances, failures " + ", ".join(f"({k}) {v}" for k, v in failures.items())
           + f"; {elapsed:.1f}s (< 300s)")


def test_criterion_8_marking_process():
    path = graph_of([(0, 0), (1, 0), (2, 0)])
    m_path = len(marking_process(path))
    cfg = ExperimentConfig(k=3, trials=500, master_seed=MASTER_SEED, schedule=[(1000, 6.0)],
                           toggles={"rule_k": True, "marking": True})
    recs = [run_trial(cfg, 1000, 6.0, t) for t in range(500)]
    full = [r for r in recs if r.marking_size == r.n]
    p_all = len(full) / len(recs)
    same = all(r.restricted_size == r.c_k_size and r.restricted_equals_full for r in full)
    ok = m_path == 1 and p_all >= 0.99 and same
    report(8, ok, f"path M = {m_path}; P(M = n) = {p_all:.3f} (>= 0.99); "
                  f"C_k' == C_k on all {len(full)} fully-marked trials: {same}")


def test_criterion_9_determinism(criterion4_run, tmp_path):
    _, _, first, _ = criterion4_run
    sweep(ExperimentConfig(**CRITERION4), tmp_path)
    a = (first / "results.csv").read_bytes()
    b = (tmp_path / "results.csv").read_bytes()
    report(9, a == b, f"two sweeps with master seed {MASTER_SEED}: CSV byte-identical ({len(a)} bytes)")
