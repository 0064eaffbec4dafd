"""Seeded Monte Carlo harness.

Random streams
--------------
Every generator is numpy's PCG64 (``np.random.default_rng``). A trial's seed
is derived from ``(master_seed, n, ell, trial_index)`` by feeding the words
``[master_seed, n, hi32(bits(ell)), lo32(bits(ell)), trial_index]`` to
``np.random.SeedSequence`` and taking its first 64-bit output word, where
``bits(ell)`` is the IEEE-754 binary64 pattern of ``ell``. The instance is
drawn from ``default_rng(seed)`` (x then y for each point, in ID order); the
grid construction uses ``default_rng([seed, 1])``. Trials therefore do not
depend on execution order.
"""
from __future__ import annotations

import csv
import io
import json
import math
import struct
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from rulek.errors import WorkCapExceeded
from rulek.geometry import (
    ALPHA,
    DELTA,
    RHO,
    Point,
    SquareRegion,
    coverage_check,
    lemma1_points,
)
from rulek.graph import Instance, build_graph, component_count, is_cds
from rulek.oracle import DEFAULT_N_CAP, factor81_check, min_cds_bruteforce
from rulek.rules import (
    DEFAULT_WORK_CAP,
    grid_cds,
    local_maxima,
    marking_process,
    rule_k,
    rule_k_restricted,
)

CSV_HEADER = [
    "n", "ell", "k", "trial", "seed", "c_k", "u_k", "m_marked", "c_k_restricted",
    "l_count", "grid_size", "b_event", "components", "is_cds", "opt_size", "wall_ms",
]

STATISTICS = ("rule_k", "marking", "local_maxima", "grid_cds", "oracle", "degree_tail")

_U64 = (1 << 64) - 1


def _check_seed(seed) -> int:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)) or not 0 <= seed <= _U64:
        raise ValueError(f"seed: must be an integer in [0, 2^64), got {seed!r}")
    return int(seed)


def derive_seed(master_seed: int, n: int, ell: float, trial_index: int) -> int:
    (bits,) = struct.unpack("<Q", struct.pack("<d", float(ell)))
    words = [_check_seed(master_seed), int(n), bits >> 32, bits & 0xFFFFFFFF, int(trial_index)]
    return int(np.random.SeedSequence(words).generate_state(1, np.uint64)[0])


def generate_instance(n: int, ell: float, seed: int) -> Instance:
    """n i.i.d. uniform points in [0, ell]^2."""
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ValueError(f"n: must be an integer >= 1, got {n!r}")
    if not math.isfinite(ell) or ell <= 1:
        raise ValueError(f"ell: must be a finite value > 1, got {ell!r}")
    rng = np.random.default_rng(_check_seed(seed))
    return Instance(rng.random((int(n), 2)) * ell, float(ell))


# ---------------------------------------------------------------- config


def family_ell(n: int, rule: str, c: float, beta: float | None = None) -> float:
    if rule == "sqrt_n_over_log_n":
        return c * math.sqrt(n / math.log(n))
    if rule == "power":
        if beta is None or not beta < 0.5:
            raise ValueError(f"beta: power-law schedules need beta < 1/2, got {beta!r}")
        return c * n**beta
    raise ValueError(f"family.rule: unknown schedule rule {rule!r}")


@dataclass
class ExperimentConfig:
    k: int = 3
    trials: int = 1
    master_seed: int = 0
    schedule: list = field(default_factory=list)  # (n, ell) pairs
    toggles: dict = field(default_factory=lambda: {"rule_k": True, "local_maxima": True})
    family: dict | None = None
    at_most: bool = False
    work_cap: int = DEFAULT_WORK_CAP
    oracle_cap: int = DEFAULT_N_CAP
    timing: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.family is not None and not self.schedule:
            fam = self.family
            if "ns" not in fam:
                raise ValueError("family.ns: list of n values is required")
            self.schedule = [
                (int(n), family_ell(int(n), fam.get("rule", ""), float(fam.get("c", 1.0)), fam.get("beta")))
                for n in fam["ns"]
            ]
        self.schedule = [(int(n), float(ell)) for n, ell in self.schedule]
        self.validate()

    def validate(self) -> None:
        if isinstance(self.k, bool) or int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k: must be an integer >= 1, got {self.k!r}")
        if isinstance(self.trials, bool) or int(self.trials) != self.trials or self.trials < 1:
            raise ValueError(f"trials: must be an integer >= 1, got {self.trials!r}")
        _check_seed(self.master_seed)
        if not self.schedule:
            raise ValueError("schedule: at least one (n, ell) cell is required")
        for n, ell in self.schedule:
            if n < 1:
                raise ValueError(f"schedule: n must be >= 1, got {n}")
            if not math.isfinite(ell) or ell <= 1:
                raise ValueError(f"schedule: ell must be > 1, got {ell} for n = {n}")
        unknown = set(self.toggles) - set(STATISTICS)
        if unknown:
            raise ValueError(f"toggles: unknown statistic {sorted(unknown)[0]!r}")
        if self.workers < 1:
            raise ValueError(f"workers: must be >= 1, got {self.workers!r}")

    def on(self, name: str) -> bool:
        return bool(self.toggles.get(name, False))

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ValueError("config: expected a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"{sorted(unknown)[0]}: unknown config field")
        return cls(**data)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ValueError(f"config: {path} is not valid JSON ({exc.msg})") from None
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["schedule"] = [list(c) for c in self.schedule]
        return d


# ---------------------------------------------------------------- trials


class TrialFailed(RuntimeError):
    def __init__(self, n, ell, trial_index, cause):
        self.n, self.ell, self.trial_index = n, ell, trial_index
        super().__init__(f"trial n={n} ell={ell!r} index={trial_index}: {cause}")


@dataclass
class TrialRecord:
    n: int
    ell: float
    k: int
    trial_index: int
    derived_seed: int
    c_k_size: int | None = None
    u_k: int | None = None
    marking_size: int | None = None
    restricted_size: int | None = None
    local_max_count: int | None = None
    grid_size: int | None = None
    b_event: bool | None = None
    component_count: int | None = None
    is_cds: bool | None = None
    opt_size: int | None = None
    wall_ms: float | None = None
    grid_is_cds: bool | None = None
    factor81: bool | None = None
    restricted_equals_full: bool | None = None
    rho_1: int | None = None

    def csv_row(self) -> list:
        def cell(v):
            if v is None:
                return ""
            if isinstance(v, bool):
                return "1" if v else "0"
            if isinstance(v, float):
                return repr(v)
            return str(v)

        return [cell(v) for v in (
            self.n, self.ell, self.k, self.trial_index, self.derived_seed, self.c_k_size,
            self.u_k, self.marking_size, self.restricted_size, self.local_max_count,
            self.grid_size, self.b_event, self.component_count, self.is_cds,
            self.opt_size, None if self.wall_ms is None else round(self.wall_ms, 3),
        )]

    def violations(self) -> list[str]:
        """Broken record invariants (empty when consistent)."""
        bad = []
        if self.c_k_size is not None and self.c_k_size + self.u_k != self.n:
            bad.append("c_k + u_k != n")
        if self.c_k_size is not None and self.local_max_count is not None:
            if not self.local_max_count <= self.c_k_size <= self.n:
                bad.append("L <= C_k <= n fails")
        if self.restricted_size is not None and self.restricted_size > self.marking_size:
            bad.append("C_k' > M")
        if self.is_cds is False:
            bad.append("Rule k output is not a CDS")
        return bad


def run_trial(cfg: ExperimentConfig, n: int, ell: float, trial_index: int) -> TrialRecord:
    start = time.perf_counter()
    seed = derive_seed(cfg.master_seed, n, ell, trial_index)
    rec = TrialRecord(n=n, ell=float(ell), k=cfg.k, trial_index=trial_index, derived_seed=seed)
    g = build_graph(generate_instance(n, ell, seed))
    everything = np.ones(g.n, dtype=bool)
    rec.component_count = component_count(g, everything)
    try:
        full = None
        if cfg.on("rule_k"):
            full = rule_k(g, cfg.k, at_most=cfg.at_most, work_cap=cfg.work_cap)
            rec.c_k_size = full.size
            rec.u_k = full.excluded_count
            rec.is_cds = full.verified_dominating and full.verified_component_preserving
        if cfg.on("marking"):
            marked = marking_process(g)
            rec.marking_size = len(marked)
            restricted = rule_k_restricted(
                g, cfg.k, marked, at_most=cfg.at_most, work_cap=cfg.work_cap, verify=False
            )
            rec.restricted_size = restricted.size
            if full is not None and len(marked) == g.n:
                rec.restricted_equals_full = restricted.members == full.members
    except WorkCapExceeded as exc:
        raise TrialFailed(n, ell, trial_index, exc) from exc
    if cfg.on("local_maxima"):
        rec.local_max_count = len(local_maxima(g))
    if cfg.on("grid_cds"):
        grid = grid_cds(g, np.random.default_rng([seed, 1]))
        rec.grid_size = grid.size
        rec.b_event = grid.all_cells_occupied
        rec.grid_is_cds = is_cds(g, grid.members)
        rec.factor81 = factor81_check(g, grid)
    if cfg.on("oracle") and n <= cfg.oracle_cap:
        rec.opt_size = min_cds_bruteforce(g, cfg.oracle_cap).opt_size
    if cfg.on("degree_tail"):
        rec.rho_1 = int(np.count_nonzero(g.neighbors(1) > 1))
    if cfg.timing:
        rec.wall_ms = (time.perf_counter() - start) * 1000.0
    return rec


# ---------------------------------------------------------------- estimators


@dataclass(frozen=True)
class Estimate:
    frequency: float
    se: float
    bound: float
    hits: int
    trials: int
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(d.pop("extra"))
        return d


def _proportion_se(hits: int, trials: int) -> float:
    f = hits / trials
    return math.sqrt(f * (1.0 - f) / trials)


def km_bound(m: float) -> float:
    """1 - 4 alpha^m with alpha = 1 - delta^2 / 4; may be negative (vacuous)."""
    return 1.0 - 4.0 * math.exp(m * math.log(ALPHA))


def sample_local_region(p: Point, Q: SquareRegion, m: int, rng: np.random.Generator) -> np.ndarray:
    """m uniform points of D1(p) within Q, by rejection from its bounding box."""
    x0, x1 = max(0.0, p[0] - 1.0), min(Q.side, p[0] + 1.0)
    y0, y1 = max(0.0, p[1] - 1.0), min(Q.side, p[1] + 1.0)
    out = []
    have = 0
    while have < m:
        batch = max(64, int(1.35 * (m - have)) + 16)
        xs = rng.uniform(x0, x1, batch)
        ys = rng.uniform(y0, y1, batch)
        ok = (xs - p[0]) ** 2 + (ys - p[1]) ** 2 <= 1.0
        pts = np.column_stack((xs[ok], ys[ok]))
        out.append(pts)
        have += len(pts)
    return np.concatenate(out)[:m]


def _unit_connected(pts: np.ndarray) -> bool:
    d2 = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
    adj = d2 <= 1.0
    seen = np.zeros(len(pts), dtype=bool)
    seen[0] = True
    stack = [0]
    while stack:
        a = stack.pop()
        for b in np.flatnonzero(adj[a] & ~seen):
            seen[b] = True
            stack.append(int(b))
    return bool(seen.all())


def estimate_km(
    k: int,
    m: int,
    p: Point,
    ell: float,
    trials: int,
    seed: int,
    mode: str = "sufficient",
    pitch: float = 0.01,
) -> Estimate:
    """Frequency of a certified k-point connected cover of D1(p) among m random points.

    ``sufficient``: each delta-disk around the three sector points holds a
    sample and at least k samples fall in the rho-disk around the last one.
    ``grid``: additionally the k witness points are checked to be connected
    and to cover the sampled region at the given pitch.
    """
    if k < 3:
        raise ValueError(f"k: the three-sector construction needs k >= 3, got {k}")
    if m < k:
        raise ValueError(f"m: need m >= k (m={m}, k={k})")
    if mode not in ("sufficient", "grid"):
        raise ValueError(f"mode: expected 'sufficient' or 'grid', got {mode!r}")
    if trials < 1:
        raise ValueError(f"trials: must be >= 1, got {trials}")
    Q = SquareRegion(ell)
    cons = lemma1_points(p, Q)
    z = np.asarray(cons.z)
    rng = np.random.default_rng(_check_seed(seed))
    hits = 0
    for _ in range(trials):
        pts = sample_local_region(cons.center, Q, m, rng)
        near = [(pts[:, 0] - zx) ** 2 + (pts[:, 1] - zy) ** 2 for zx, zy in z]
        in_delta = [d <= DELTA**2 for d in near]
        in_rho = near[2] <= RHO**2
        if not all(a.any() for a in in_delta) or np.count_nonzero(in_rho) < k:
            continue
        if mode == "grid":
            picks = [int(np.argmax(a)) for a in in_delta]
            for j in np.flatnonzero(in_rho):
                if len(picks) >= k:
                    break
                if j not in picks:
                    picks.append(int(j))
            witness = pts[picks]
            if len(set(picks)) < k or not _unit_connected(witness):
                continue
            if not coverage_check(cons.center, Q, [tuple(w) for w in witness], 1.0, pitch):
                continue
        hits += 1
    return Estimate(
        frequency=hits / trials,
        se=_proportion_se(hits, trials),
        bound=km_bound(m),
        hits=hits,
        trials=trials,
        extra={"k": k, "m": m, "mode": mode},
    )


def degree_threshold(n: int, ell: float, i: int) -> float:
    return (n - i) * math.pi / (8.0 * ell * ell)


def chernoff_bound(n: int, ell: float, i: int) -> float:
    return math.exp(-(n - i) * math.pi / (32.0 * ell * ell))


def degree_tail_check(n: int, ell: float, i: int, trials: int, seed: int) -> Estimate:
    """Frequency of vertex i having fewer higher-ID neighbors than (n-i)pi/(8 ell^2)."""
    if not 1 <= i <= n:
        raise ValueError(f"i: vertex ID {i} out of range 1..{n}")
    if trials < 1:
        raise ValueError(f"trials: must be >= 1, got {trials}")
    thresh = degree_threshold(n, ell, i)
    hits = 0
    for t in range(trials):
        pts = generate_instance(n, ell, derive_seed(seed, n, ell, t)).points
        later = pts[i:]
        d2 = ((later - pts[i - 1]) ** 2).sum(axis=1)
        rho = int(np.count_nonzero(d2 <= 1.0))
        hits += rho < thresh
    return Estimate(
        frequency=hits / trials,
        se=_proportion_se(hits, trials),
        bound=chernoff_bound(n, ell, i),
        hits=hits,
        trials=trials,
        extra={"threshold": thresh, "n": n, "ell": ell, "i": i},
    )


def theoretical_curves(n: int, ell: float, k: int = 3) -> dict:
    """Bound curves at (n, ell). Requires ell > sqrt(pi)."""
    if not ell > math.sqrt(math.pi):
        raise ValueError(f"ell: curves need ell > sqrt(pi), got {ell!r}")
    a = ell * ell
    return {
        "l_bound": a / math.pi * (1.0 - (1.0 - math.pi / a) ** n),
        "quarter_ellsq": a / 4.0,
        "marking_tail": n * math.exp(-n / a),
        "chernoff_i1": chernoff_bound(n, ell, 1),
        "km_bound_at_threshold": km_bound(degree_threshold(n, ell, 1)),
    }


# ---------------------------------------------------------------- sweep

_STAT_FIELDS = {
    "c_k": "c_k_size",
    "u_k": "u_k",
    "m_marked": "marking_size",
    "c_k_restricted": "restricted_size",
    "l_count": "local_max_count",
    "grid_size": "grid_size",
    "b_event": "b_event",
    "components": "component_count",
    "is_cds": "is_cds",
    "opt_size": "opt_size",
    "grid_is_cds": "grid_is_cds",
    "factor81": "factor81",
    "rho_1": "rho_1",
    "wall_ms": "wall_ms",
}


def describe(values: Sequence[float]) -> dict:
    x = np.asarray(values, dtype=float)
    sd = float(x.std(ddof=1)) if len(x) > 1 else 0.0
    return {"mean": float(x.mean()), "sd": sd, "se": sd / math.sqrt(len(x)), "count": len(x)}


def summarize(records: Sequence[TrialRecord], failures: Sequence[dict] = ()) -> dict:
    """Per-(n, ell) means, sample SDs and SEs, straight from trial records."""
    cells: dict = {}
    for rec in records:
        cells.setdefault((rec.n, rec.ell), []).append(rec)
    out = []
    for (n, ell), recs in sorted(cells.items()):
        recs.sort(key=lambda r: r.trial_index)
        stats = {}
        for name, attr in _STAT_FIELDS.items():
            vals = [getattr(r, attr) for r in recs if getattr(r, attr) is not None]
            if vals:
                stats[name] = describe([float(v) for v in vals])
        ck = [r.c_k_size / (ell * ell) for r in recs if r.c_k_size is not None]
        if ck:
            stats["c_k_over_ell_sq"] = describe(ck)
        try:
            curves = theoretical_curves(n, ell, recs[0].k)
        except ValueError:
            curves = None
        out.append({"n": n, "ell": ell, "trials": len(recs), "stats": stats, "curves": curves})
    return {"cells": out, "failures": len(failures), "errors": list(failures)}


def records_csv(records: Sequence[TrialRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for rec in sorted(records, key=lambda r: (r.n, r.ell, r.trial_index)):
        w.writerow(rec.csv_row())
    return buf.getvalue()


def _run_cell(args):
    cfg, n, ell, t = args
    try:
        return run_trial(cfg, n, ell, t), None
    except TrialFailed as exc:
        return None, {"n": n, "ell": ell, "trial": t, "error": str(exc)}


def sweep(cfg: ExperimentConfig, out_dir=None) -> tuple[dict, list[TrialRecord]]:
    """Run every (n, ell, trial) cell; optionally write results.csv and summary.json."""
    jobs = [(cfg, n, ell, t) for n, ell in cfg.schedule for t in range(cfg.trials)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_run_cell, jobs, chunksize=4))
    else:
        results = [_run_cell(j) for j in jobs]
    records = [r for r, _ in results if r is not None]
    failures = [f for _, f in results if f is not None]
    records.sort(key=lambda r: (r.n, r.ell, r.trial_index))
    summary = summarize(records, failures)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "results.csv", "w", encoding="utf-8", newline="") as fh:
            fh.write(records_csv(records))
        with open(out / "summary.json", "w", encoding="utf-8", newline="\n") as fh:
            json.dump(summary, fh, indent=2, sort_keys=False)
            fh.write("\n")
    return summary, records


def lemma1_suite(samples: int, ell: float, pitch: float = 0.005, seed: int = 0) -> dict:
    """Check the three-point sector cover at `samples` uniform centers in [0, ell]^2."""
    if samples < 1:
        raise ValueError(f"samples: must be >= 1, got {samples}")
    Q = SquareRegion(ell)
    rng = np.random.default_rng(_check_seed(seed))
    centers = rng.random((samples, 2)) * ell
    limit = 1.0 - 2.0 * DELTA + 1e-12
    bad_distance = bad_cover = 0
    worst = 0.0
    for x, y in centers:
        cons = lemma1_points(Point(x, y), Q)
        z = cons.z
        gaps = (math.dist(z[0], z[1]), math.dist(z[1], z[2]), math.dist(z[2], z[0]))
        worst = max(worst, *gaps)
        if max(gaps) > limit:
            bad_distance += 1
        if not coverage_check(cons.center, Q, z, RHO, pitch):
            bad_cover += 1
    return {
        "samples": samples,
        "ell": ell,
        "pitch": pitch,
        "distance_failures": bad_distance,
        "coverage_failures": bad_cover,
        "max_consecutive_distance": worst,
        "distance_limit": limit,
        "passed": bad_distance == 0 and bad_cover == 0,
    }
