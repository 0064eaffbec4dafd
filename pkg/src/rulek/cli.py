"""``rulek`` command line.

Exit status: 0 on success, 1 on invalid input, 2 on internal failures
(work cap exceeded, I/O errors).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from rulek import experiments, oracle, rules
from rulek.errors import WorkCapExceeded
from rulek.geometry import Point
from rulek.graph import build_graph, is_cds, is_dominating, component_count, read_instance, write_instance


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj) + "\n")


def _load(args):
    return build_graph(read_instance(args.inp))


def cmd_gen(args):
    inst = experiments.generate_instance(args.n, args.ell, args.seed)
    if args.out:
        write_instance(inst, args.out)
    else:
        _emit(inst.to_dict())


def cmd_rulek(args):
    g = _load(args)
    if args.restrict == "marked":
        res = rules.rule_k_restricted(
            g, args.k, rules.marking_process(g), at_most=args.at_most_k, work_cap=args.work_cap
        )
    else:
        res = rules.rule_k(g, args.k, at_most=args.at_most_k, work_cap=args.work_cap)
    _emit({"n": g.n, "k": args.k, "at_most_k": args.at_most_k, "restrict": args.restrict, **res.to_dict()})


def cmd_mark(args):
    marked = rules.marking_process(_load(args))
    _emit({"m": len(marked), "marked": sorted(marked)})


def cmd_grid(args):
    g = _load(args)
    res = rules.grid_cds(g, np.random.default_rng(args.seed))
    _emit(res.to_dict())


def cmd_localmax(args):
    lm = rules.local_maxima(_load(args))
    _emit({"l": len(lm), "local_maxima": sorted(lm)})


def cmd_oracle(args):
    g = _load(args)
    res = oracle.min_cds_bruteforce(g, args.cap)
    _emit(res.to_dict())


def cmd_km(args):
    ell = args.ell
    p = Point(args.px if args.px is not None else ell / 2, args.py if args.py is not None else ell / 2)
    est = experiments.estimate_km(args.k, args.m, p, ell, args.trials, args.seed, args.mode, args.pitch)
    out = est.to_dict()
    out["curve"] = est.bound
    _emit(out)


def cmd_lemma1(args):
    _emit(experiments.lemma1_suite(args.samples, args.ell, args.pitch, args.seed))


def cmd_degtail(args):
    est = experiments.degree_tail_check(args.n, args.ell, args.i, args.trials, args.seed)
    _emit(est.to_dict())


def cmd_sweep(args):
    cfg = experiments.ExperimentConfig.from_file(args.config)
    if args.workers is not None:
        cfg.workers = args.workers
        cfg.validate()
    summary, _ = experiments.sweep(cfg, args.out_dir)
    _emit({"out_dir": str(args.out_dir), "cells": len(summary["cells"]), "failures": summary["failures"]})


def _read_set(path) -> list[int]:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValueError(f"set: {path} is not valid JSON ({exc.msg})") from None
    if isinstance(data, dict):
        if "members" not in data:
            raise ValueError("members: missing from set file")
        data = data["members"]
    if not isinstance(data, list) or not all(isinstance(v, int) and not isinstance(v, bool) for v in data):
        raise ValueError("members: expected a list of integer vertex IDs")
    return data


def cmd_verify(args):
    g = _load(args)
    members = _read_set(args.set)
    try:
        mask = g.mask(members)
    except IndexError as exc:
        raise ValueError(f"members: {exc}") from None
    _emit({
        "size": int(mask.sum()),
        "is_dominating": is_dominating(g, mask),
        "components": component_count(g, mask),
        "graph_components": component_count(g, np.ones(g.n, dtype=bool)),
        "is_cds": is_cds(g, mask),
    })


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rulek", description="Rule k connected dominating sets on unit disk graphs")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def with_input(sp):
        sp.add_argument("--in", dest="inp", required=True, help="instance JSON file")
        return sp

    s = sub.add_parser("gen", help="generate a random instance")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--ell", type=float, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out", help="output path (default: stdout)")
    s.set_defaults(func=cmd_gen)

    s = with_input(sub.add_parser("rulek", help="run Rule k"))
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--at-most-k", action="store_true", help="also exclude on covering sets of fewer than k")
    s.add_argument("--restrict", choices=["marked"], help="apply Rule k to the marked vertices only")
    s.add_argument("--work-cap", type=int, default=rules.DEFAULT_WORK_CAP)
    s.set_defaults(func=cmd_rulek)

    s = with_input(sub.add_parser("mark", help="run the marking process"))
    s.set_defaults(func=cmd_mark)

    s = with_input(sub.add_parser("grid", help="grid-cell CDS construction"))
    s.add_argument("--seed", type=int, required=True)
    s.set_defaults(func=cmd_grid)

    s = with_input(sub.add_parser("localmax", help="vertices with the largest ID in their neighborhood"))
    s.set_defaults(func=cmd_localmax)

    s = with_input(sub.add_parser("oracle", help="exact minimum CDS (small n)"))
    s.add_argument("--cap", type=int, default=oracle.DEFAULT_N_CAP)
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("km", help="estimate the k-point local cover probability")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--trials", type=int, required=True)
    s.add_argument("--ell", type=float, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--mode", choices=["sufficient", "grid"], default="sufficient")
    s.add_argument("--px", type=float)
    s.add_argument("--py", type=float)
    s.add_argument("--pitch", type=float, default=0.01)
    s.set_defaults(func=cmd_km)

    s = sub.add_parser("lemma1", help="check the three-point sector cover on random centers")
    s.add_argument("--samples", type=int, required=True)
    s.add_argument("--ell", type=float, required=True)
    s.add_argument("--pitch", type=float, default=0.005)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_lemma1)

    s = sub.add_parser("degtail", help="empirical lower tail of the higher-ID degree")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--ell", type=float, required=True)
    s.add_argument("--i", type=int, required=True)
    s.add_argument("--trials", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.set_defaults(func=cmd_degtail)

    s = sub.add_parser("sweep", help="run a Monte Carlo sweep from a config file")
    s.add_argument("--config", required=True)
    s.add_argument("--out-dir", required=True)
    s.add_argument("--workers", type=int)
    s.set_defaults(func=cmd_sweep)

    s = with_input(sub.add_parser("verify", help="check whether a vertex set is a CDS"))
    s.add_argument("--set", required=True, help="JSON list of vertex IDs (or {\"members\": [...]})")
    s.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.func(args)
    except (WorkCapExceeded, experiments.TrialFailed, OSError) as exc:
        print(f"rulek: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, IndexError) as exc:
        print(f"rulek: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
