"""Command-line interface: estimate / weights / bounds / gen / bench.

Primary output is machine-parsable (JSON on stdout, CSV files for tables)
and deterministic for a fixed seed. Exit codes: 0 success, 2 usage or
validation error, 3 numeric runtime failure. Errors are reported as a
one-line JSON object on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import bench as bench_mod
from . import io as hpio
from .core import HPDivError, PointCloud
from .estimators import knn_estimate, wnn_estimate
from .mst import mst_estimate
from .oracle import bayes_bounds, truncated_normal, uniform_box
from .synth import RejectionStall, make_state, sample
from .weights import (
    SingularConstraints,
    constraint_matrix,
    default_l_values,
    resolve_schedule,
    solve_weights,
)

# errors that indicate a numeric failure at runtime rather than bad input
_NUMERIC_ERRORS = (SingularConstraints, RejectionStall)


def _emit(obj) -> None:
    print(json.dumps(obj))


def _fail(exc: Exception) -> int:
    code = 3 if isinstance(exc, _NUMERIC_ERRORS) else 2
    sys.stderr.write(
        json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n"
    )
    return code


def _csv_floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _load_pair(args) -> tuple[PointCloud, PointCloud]:
    if args.x and args.y:
        return hpio.load_points(args.x), hpio.load_points(args.y)
    ds = hpio.load_labeled(args.data)
    return hpio.class_pair(ds, args.class_a, args.class_b)


def _check_input_mode(parser, args) -> None:
    point_mode = bool(args.x or args.y)
    label_mode = bool(args.data or args.class_a or args.class_b)
    if point_mode and label_mode:
        parser.error("point files (--x/--y) and labeled file (--data) are exclusive")
    if point_mode and not (args.x and args.y):
        parser.error("point mode needs both --x and --y")
    if label_mode and not (args.data and args.class_a and args.class_b):
        parser.error("labeled mode needs --data, --class-a and --class-b")
    if not point_mode and not label_mode:
        parser.error("supply --x/--y or --data/--class-a/--class-b")


def cmd_estimate(args) -> int:
    x, y = _load_pair(args)
    if args.method == "knn":
        if args.k is None:
            raise HPDivError("--k is required for method knn")
        res = knn_estimate(x, y, args.k, args.p, clamp=args.clamp)
    elif args.method == "wnn":
        ls = (
            np.asarray(_csv_floats(args.l_values))
            if args.l_values
            else default_l_values(x.dim)
        )
        sched = resolve_schedule(ls, x.dim, len(x), m=len(y))
        res = wnn_estimate(x, y, sched, args.p, clamp=args.clamp)
    else:
        res = mst_estimate(x, y, args.p, clamp=args.clamp)
    out = {
        "method": res.method,
        "value": res.value,
        "n": res.n,
        "m": res.m,
        "p": res.p,
        "clamped": res.clamped,
    }
    out.update(res.params)
    _emit(out)
    return 0


def cmd_weights(args) -> int:
    ls = (
        np.asarray(_csv_floats(args.l_values))
        if args.l_values
        else default_l_values(args.d)
    )
    w = solve_weights(ls, args.d)
    a, b = constraint_matrix(ls, args.d)
    out = {
        "d": args.d,
        "l_values": ls.tolist(),
        "weights": w.tolist(),
        "residual": float(np.abs(a @ w - b).max()),
        "k_values": None,
    }
    if args.n is not None:
        out["k_values"] = resolve_schedule(ls, args.d, args.n).k_values.tolist()
    _emit(out)
    return 0


def cmd_bounds(args) -> int:
    bounds = bayes_bounds(args.divergence, args.p)
    _emit({"lower": bounds.lower, "upper": bounds.upper})
    return 0


def cmd_gen(args) -> int:
    box = _csv_floats(args.box)
    if len(box) != 2:
        raise HPDivError("--box wants LO,HI")
    if args.dist == "uniform":
        spec = uniform_box(np.tile(box, (args.dim, 1)))
    else:
        mean = _csv_floats(args.mean) if args.mean else [0.0] * args.dim
        if len(mean) != args.dim:
            raise HPDivError(f"--mean needs {args.dim} values")
        sigma = _csv_floats(args.sigma) if args.sigma else [1.0] * args.dim
        if len(sigma) == 1:
            sigma = sigma * args.dim
        if len(sigma) != args.dim:
            raise HPDivError(f"--sigma needs 1 or {args.dim} values")
        cov = np.asarray(sigma, dtype=float) ** 2
        spec = truncated_normal(mean, cov, box)
    cloud = sample(make_state(spec, args.seed), args.n)
    hpio.save_points(args.out, cloud)
    _emit({"written": len(cloud), "dim": cloud.dim, "path": args.out})
    return 0


def cmd_bench(args) -> int:
    plan = bench_mod.ExperimentPlan(
        scenario=args.scenario,
        dims=args.dims,
        n_grid=tuple(int(v) for v in args.n_grid.split(",")),
        methods=tuple(bench_mod.parse_methods(args.methods)),
        trials=args.trials,
        p=args.p,
        base_seed=args.seed,
        truth=args.truth,
        shift=args.shift,
        x_path=args.x,
        y_path=args.y,
    )
    summaries = bench_mod.run_plan(plan)
    bench_mod.summarize_csv(summaries, args.out)
    _emit({"out": args.out, "cells": len(summaries)})
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hpdiv",
        description="Graph-based divergence estimation between two samples",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="estimate divergence between two samples")
    est.add_argument("--method", choices=["knn", "wnn", "mst"], required=True)
    est.add_argument("--k", type=int, help="neighbor rank for knn")
    est.add_argument("--l-values", help="comma-separated index values for wnn")
    est.add_argument("--p", type=float, default=0.5)
    est.add_argument("--clamp", action="store_true", help="clip the value into [0,1]")
    est.add_argument("--x", help="CSV of X points")
    est.add_argument("--y", help="CSV of Y points")
    est.add_argument("--data", help="labeled CSV (features + class column)")
    est.add_argument("--class-a")
    est.add_argument("--class-b")

    wts = sub.add_parser("weights", help="solve ensemble weights")
    wts.add_argument("--d", type=int, required=True)
    wts.add_argument("--l-values")
    wts.add_argument("--n", type=int, help="resolve K(l) for this sample size")

    bnd = sub.add_parser("bounds", help="Bayes error bounds from a divergence")
    bnd.add_argument("--divergence", type=float, required=True)
    bnd.add_argument("--p", type=float, default=0.5)

    gen = sub.add_parser("gen", help="generate a synthetic sample CSV")
    gen.add_argument("--dist", choices=["tnorm", "uniform"], required=True)
    gen.add_argument("--dim", type=int, required=True)
    gen.add_argument("--mean", help="comma-separated mean vector (tnorm)")
    gen.add_argument("--sigma", help="per-axis standard deviations (tnorm)")
    gen.add_argument("--box", default="-5,5", help="LO,HI per-axis bounds")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)

    ben = sub.add_parser("bench", help="run a Monte Carlo benchmark")
    ben.add_argument(
        "--scenario",
        choices=[
            bench_mod.SCENARIO_GAUSS_SHIFT,
            bench_mod.SCENARIO_GAUSS_SCALE,
            bench_mod.SCENARIO_GAUSS_VS_UNIFORM,
            bench_mod.SCENARIO_CSV,
        ],
        required=True,
    )
    ben.add_argument("--dims", type=int, default=1)
    ben.add_argument("--n-grid", default="128,256,512,1024,2048")
    ben.add_argument("--trials", type=int, default=100)
    ben.add_argument("--methods", default="knn:5,wnn,mst")
    ben.add_argument("--p", type=float, default=0.5)
    ben.add_argument("--seed", type=int, default=0)
    ben.add_argument("--shift", type=float, default=1.0)
    ben.add_argument("--truth", type=float)
    ben.add_argument("--x", help="X CSV for the csv scenario")
    ben.add_argument("--y", help="Y CSV for the csv scenario")
    ben.add_argument("--out", required=True)
    return parser


_HANDLERS = {
    "estimate": cmd_estimate,
    "weights": cmd_weights,
    "bounds": cmd_bounds,
    "gen": cmd_gen,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "estimate":
        _check_input_mode(parser, args)
    try:
        return _HANDLERS[args.command](args)
    except HPDivError as exc:
        return _fail(exc)
    except OSError as exc:
        return _fail(exc)


if __name__ == "__main__":
    sys.exit(main())
