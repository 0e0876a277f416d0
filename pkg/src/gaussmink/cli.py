"""Command line interface.

Exit status is 0 on success, 1 when a solver or check fails (the error class
name is printed to stderr), and 2 for usage errors and unreadable input files.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import io
from .circle_grid import Grid
from .continuation import HomotopyConfig, continuation_solve
from .errors import GaussMinkError
from .gauss_measure import (gaussian_volume, isoperimetric_deficit, lp_total,
                            lp_total_boundary_oracle)
from .variational import VariationalOptions, variational_solve
from .verify_suite import CSV_HEADER, SUITES

EXIT_OK, EXIT_SOLVER, EXIT_USAGE = 0, 1, 2
SWEEP_HEADER = ("p", "mass", "gamma", "S_p", "deficit", "homotopy_steps", "iters")


class UsageError(Exception):
    pass


def _float_range(text: str) -> list[float]:
    try:
        a, b, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise UsageError(f"expected start:stop:step, got {text!r}") from None
    if step <= 0 or b < a:
        raise UsageError(f"empty or invalid range {text!r}")
    count = int(math.floor((b - a) / step + 1e-9)) + 1
    return [round(a + i * step, 12) for i in range(count)]


def _emit(text: str, path: str | None):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _mode_for(p: float, mode: str) -> str:
    if mode == "auto":
        if 0 < p < 1:
            raise UsageError("p in (0,1) unsupported")
        return "variational" if p <= 0 else "continuation"
    if mode == "variational" and p > 0:
        raise UsageError("variational mode needs p <= 0")
    if mode == "continuation" and p < 1:
        raise UsageError("continuation mode needs p >= 1")
    return mode


# ----------------------------------------------------------------- commands

def cmd_solve(args) -> int:
    mode = _mode_for(args.p, args.mode)
    mu = io.read_measure(args.measure)
    if mode == "variational":
        rep = variational_solve(mu, args.p, VariationalOptions(tol_kkt=args.tol or 1e-3))
        out = {
            "mode": mode, "p": args.p, "support": io._floats(rep.body.h),
            "residual_linf": None, "kkt_residual": rep.kkt_residual, "gamma": rep.gamma,
            "lambda": rep.lam, "objective": rep.objective, "iterations": rep.iterations,
            "converged": rep.converged, "homotopy_steps": None, "newton_iters": None,
        }
        body = rep.body
    else:
        cfg = HomotopyConfig(p=args.p, newton_tol=args.tol or 1e-10,
                             override_mass_bound=args.override_mass_bound)
        rep = continuation_solve(mu, cfg)
        out = {
            "mode": mode, "p": args.p, "support": io._floats(rep.body.h),
            "residual_linf": rep.residual_linf, "gamma": rep.gamma, "lambda": None,
            "homotopy_steps": rep.homotopy_steps_used,
            "newton_iters": rep.newton_iterations_total, "mass": rep.mass,
            "warnings": rep.warnings,
        }
        body = rep.body
    _emit(json.dumps(out, indent=1) + "\n", args.out)
    if args.body_out:
        io.write_body(args.body_out, body)
    return EXIT_OK


def cmd_measure(args) -> int:
    body = io.read_body(args.body)
    p = args.p
    deficit = isoperimetric_deficit(body, p).deficit if p >= 1 else float("nan")
    row = [gaussian_volume(body), lp_total(body, p), lp_total_boundary_oracle(body, p), deficit]
    _emit(io.rows_to_csv(("gamma", "total", "total_oracle", "deficit"), [row]), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    names = list(SUITES) if args.suite == "all" else [args.suite]
    results = []
    for name in names:
        res = SUITES[name](seed=args.seed)
        results.append(res)
        status = "PASS" if res.passed else "FAIL"
        print(f"{status} {name}: cases={res.cases} worst={res.worst_violation:.3e} "
              f"time={res.seconds:.1f}s", file=sys.stderr)
        for row in res.failures()[:5]:
            print(f"    {row.case} {row.quantity} value={row.value!r} bound={row.bound!r}",
                  file=sys.stderr)
    if args.json:
        io.write_json(args.json, {"seed": args.seed, "suites": [r.to_dict() for r in results]})
    csv_rows = [[getattr(r, c) for c in CSV_HEADER] for res in results for r in res.rows]
    _emit(io.rows_to_csv(CSV_HEADER, csv_rows), args.csv)
    return EXIT_OK if all(r.passed for r in results) else EXIT_SOLVER


def _sweep_one(task):
    p, density, grid_size = task
    g = Grid(grid_size)
    try:
        rep = continuation_solve(np.asarray(density), HomotopyConfig(p=p))
    except GaussMinkError as exc:
        return [p, g.integrate(density)] + [math.nan] * 3 + [-1, -1], exc.code
    total = lp_total(rep.body, p)
    deficit = isoperimetric_deficit(rep.body, p).deficit
    return [p, rep.mass, rep.gamma, total, deficit, rep.homotopy_steps_used,
            rep.newton_iterations_total], None


def worker_count(tasks: int) -> int:
    env = os.environ.get("GAUSSMINK_THREADS")
    limit = os.cpu_count() or 1
    if env:
        try:
            limit = max(1, int(env))
        except ValueError:
            raise UsageError(f"GAUSSMINK_THREADS must be an integer, got {env!r}") from None
    return max(1, min(limit, tasks))


def cmd_sweep(args) -> int:
    mu = io.read_measure(args.measure)
    f = np.asarray(mu.density)
    tasks = []
    if args.p_range:
        for p in _float_range(args.p_range):
            if p < 1:
                raise UsageError("sweeps run the continuation solver and need p >= 1")
            tasks.append((p, f, mu.grid.size))
    elif args.mass_range:
        if args.p is None or args.p < 1:
            raise UsageError("--mass-range needs --p >= 1")
        for m in _float_range(args.mass_range):
            tasks.append((args.p, f * (m / mu.mass), mu.grid.size))
    else:
        raise UsageError("give --p-range or --mass-range")
    workers = worker_count(len(tasks))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_one, tasks))
    else:
        results = [_sweep_one(t) for t in tasks]
    failed = 0
    for row, err in results:
        if err:
            failed += 1
            print(f"p={row[0]!r}: {err}", file=sys.stderr)
    _emit(io.rows_to_csv(SWEEP_HEADER, [r for r, _ in results]), args.out)
    return EXIT_SOLVER if failed else EXIT_OK


# -------------------------------------------------------------------- parser

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="gaussmink",
                 description="Solvers and checks for the planar L_p Gaussian Minkowski problem.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="solve the Minkowski problem for a measure file")
    s.add_argument("--mode", choices=("auto", "variational", "continuation"), default="auto")
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--measure", required=True)
    s.add_argument("--out")
    s.add_argument("--body-out")
    s.add_argument("--tol", type=float)
    s.add_argument("--override-mass-bound", action="store_true")
    s.set_defaults(func=cmd_solve)

    m = sub.add_parser("measure", help="Gaussian volume and L_p surface area of a body")
    m.add_argument("--body", required=True)
    m.add_argument("--p", type=float, required=True)
    m.add_argument("--out")
    m.set_defaults(func=cmd_measure)

    v = sub.add_parser("verify", help="run the verification suites")
    v.add_argument("--suite", choices=(*SUITES, "all"), default="all")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--json")
    v.add_argument("--csv")
    v.set_defaults(func=cmd_verify)

    w = sub.add_parser("sweep", help="continuation solves over a range of p or masses")
    w.add_argument("--measure", required=True)
    w.add_argument("--p-range")
    w.add_argument("--mass-range")
    w.add_argument("--p", type=float)
    w.add_argument("--out")
    w.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    t0 = time.perf_counter()
    try:
        code = args.func(args)
    except UsageError as exc:
        print(f"gaussmink: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (io.FormatError, OSError) as exc:
        print(f"gaussmink: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GaussMinkError as exc:
        print(f"{exc.code}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    logging.getLogger(__name__).debug("finished in %.2fs", time.perf_counter() - t0)
    return code


if __name__ == "__main__":
    sys.exit(main())
