"""Compare the compiled and pure-Python kernels.

    python3 benchmarks/bench_kernels.py [--ns 300 1000] [--repeats 1]

Instances use ell = sqrt(n / ln n) / sqrt(10). Each timing is the best of
`repeats` runs. Both backends must return identical outputs.
"""
import argparse
import math
import time

import numpy as np

from rulek import _backend
from rulek.experiments import derive_seed, generate_instance


def best_of(fn, repeats):
    best = math.inf
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench(n, repeats):
    ell = math.sqrt(n / math.log(n)) / math.sqrt(10)
    inst = generate_instance(n, ell, derive_seed(0, n, ell, 0))
    xs = np.ascontiguousarray(inst.points[:, 0])
    ys = np.ascontiguousarray(inst.points[:, 1])
    everyone = np.ones(n, dtype=np.uint8)
    row = {}
    outputs = {}
    for backend in ("cython", "python"):
        _backend.use(backend)
        k = _backend.kernels
        t_build, (indptr, indices) = best_of(lambda: k.build_adjacency(xs, ys, ell), repeats)
        t_mark, marked = best_of(lambda: k.marking(indptr, indices), repeats)
        t_rule, keep = best_of(lambda: k.rule_k_keep(indptr, indices, 3, False, everyone, 10**6), repeats)
        row[backend] = (t_build, t_mark, t_rule)
        outputs[backend] = (indptr.tolist(), indices.tolist(), list(marked), list(keep))
    if outputs["cython"] != outputs["python"]:
        raise SystemExit(f"backends disagree at n={n}")
    return ell, row


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--ns", type=int, nargs="+", default=[300, 1000])
    ap.add_argument("--repeats", type=int, default=1)
    args = ap.parse_args()
    try:
        _backend.use("cython")
    except ImportError:
        raise SystemExit("compiled extension not built; run pip install -e . --no-build-isolation")
    print(f"{'n':>6} {'ell':>6} {'kernel':>10} {'cython s':>10} {'python s':>10} {'speedup':>8}")
    for n in args.ns:
        ell, row = bench(n, args.repeats)
        for i, kernel in enumerate(("adjacency", "marking", "rule_k")):
            c, p = row["cython"][i], row["python"][i]
            print(f"{n:>6} {ell:>6.2f} {kernel:>10} {c:>10.4f} {p:>10.4f} {p / c:>7.1f}x")


if __name__ == "__main__":
    main()
