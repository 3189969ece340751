"""Command-line front-end: run the spectral homotopy solver and/or the
truncated-domain oracle on a builtin or file-defined problem and write
trajectory, convergence, and summary artifacts.

Exit codes: 0 solver finished (converged or order budget reached), 1 bad
input, 2 series diverged, 3 oracle comparison beyond tolerance.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from .laguerre_basis import BasisConfig, NodeFamily
from .ocp_model import (
    BUILTIN_PROBLEMS,
    BUILTIN_REPORT_TIMES,
    OCProblem,
    ProblemFormatError,
    derive_tpbvp,
    load_problem,
    solve_ocp,
)
from .oracle_bvp import NewtonError, TruncationConfig, compare, solve_truncated
from .sham_engine import SolverConfig, Termination

_FMT = "{:.8e}"  # 9 significant digits, scientific


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="lahoc",
        description="Solve infinite-horizon optimal control problems by Laguerre "
        "spectral homotopy, optionally cross-checked against a truncated-domain "
        "collocation oracle.",
    )
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--builtin", choices=sorted(BUILTIN_PROBLEMS), help="builtin problem name")
    src.add_argument("--problem", type=Path, help="problem definition file (lahoc-problem v1)")
    p.add_argument("--n", type=int, default=100, help="highest polynomial degree (>= 4)")
    p.add_argument("--beta", type=float, default=1.0, help="Laguerre scaling parameter")
    p.add_argument("--hbar", type=float, default=-0.6, help="convergence-control parameter")
    p.add_argument("--orders", type=int, default=20, help="maximum homotopy order")
    p.add_argument("--tol", type=float, default=1e-12, help="tail-norm stopping tolerance")
    p.add_argument("--compare", action="store_true", help="also run the oracle and compare")
    p.add_argument("--compare-tol", type=float, default=1e-4,
                   help="max allowed deviation vs the oracle (exit 3 beyond it)")
    p.add_argument("--t-end", type=float, default=40.0, help="oracle truncation horizon")
    p.add_argument("--mesh", type=int, default=2000, help="oracle mesh intervals")
    p.add_argument("--times", type=str, default=None,
                   help="comma-separated report times (default: builtin table times)")
    p.add_argument("--num-times", type=int, default=None,
                   help="report at this many log-spaced times instead")
    p.add_argument("--lipschitz", type=float, default=None,
                   help="Lipschitz estimate for the contraction-ratio diagnostic")
    p.add_argument("--out", type=Path, default=Path("lahoc_out"), help="output directory")
    p.add_argument("--sweep", type=str, default=None,
                   help="sweep axis, e.g. hbar=-1.0,-0.6,-0.2 or n=40,80,120 or beta=0.5,1")
    return p


def _report_times(args, t_end: float) -> np.ndarray:
    if args.times:
        try:
            times = np.array([float(v) for v in args.times.split(",")])
        except ValueError:
            raise SystemExit(_fail("bad --times value"))
    elif args.num_times:
        times = np.geomspace(t_end / 1000.0, t_end, args.num_times)
    elif args.builtin:
        times = np.array(BUILTIN_REPORT_TIMES[args.builtin])
    else:
        times = np.geomspace(t_end / 1000.0, t_end, 20)
    if args.compare and (times.min() < 0 or times.max() > t_end):
        raise SystemExit(_fail(f"report times must lie in [0, {t_end}] when comparing"))
    return times


def _fail(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return 1


def _load(args) -> OCProblem | None:
    if args.builtin:
        return BUILTIN_PROBLEMS[args.builtin]()
    try:
        return load_problem(args.problem)
    except ProblemFormatError as exc:
        _fail(f"{args.problem}: {exc}")
        return None
    except OSError as exc:
        _fail(str(exc))
        return None


def _solver_config(args) -> SolverConfig | None:
    if args.n < 4:
        _fail("--n must be >= 4")
        return None
    try:
        basis = BasisConfig(beta=args.beta, n_order=args.n, node_family=NodeFamily.GLR)
        return SolverConfig(hbar=args.hbar, basis=basis, max_order=args.orders,
                            tail_tol=args.tol)
    except ValueError as exc:
        _fail(str(exc))
        return None


def _write_trajectories(path: Path, bundle, n_states: int) -> None:
    n_ctrl = bundle.controls.shape[0]
    header = (
        ["time"]
        + [f"x{i + 1}" for i in range(n_states)]
        + [f"lambda{i + 1}" for i in range(n_states)]
        + [f"u{i + 1}" for i in range(n_ctrl)]
    )
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for j, t in enumerate(bundle.times):
            vals = (
                [bundle.times[j]]
                + list(bundle.states[:, j])
                + list(bundle.costates[:, j])
                + list(bundle.controls[:, j])
            )
            fh.write(",".join(_FMT.format(v) for v in vals) + "\n")


def _write_convergence(path: Path, bundle) -> None:
    with open(path, "w") as fh:
        fh.write("order,tail_norm,cost\n")
        for m, (norm, cost) in enumerate(zip(bundle.tail_norms, bundle.per_order_costs)):
            fh.write(f"{m},{_FMT.format(norm)},{_FMT.format(cost)}\n")


def _run_single(args, problem: OCProblem, config: SolverConfig) -> int:
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    times = _report_times(args, args.t_end)

    t0 = time.perf_counter()
    bundle = solve_ocp(problem, config, report_times=times,
                       lipschitz_estimate=args.lipschitz)
    solver_seconds = time.perf_counter() - t0

    _write_trajectories(out / "trajectories.csv", bundle, problem.n_states)
    _write_convergence(out / "convergence.csv", bundle)

    lines = [
        f"termination: {bundle.termination.value}",
        f"orders used: {len(bundle.tail_norms) - 1}",
        f"final tail norm: {_FMT.format(bundle.tail_norms[-1])}",
        f"cost: {_FMT.format(bundle.cost)}",
        f"solver wall time: {solver_seconds:.3f} s",
    ]
    if bundle.gamma is not None:
        gamma = "undefined" if np.isnan(bundle.gamma) else _FMT.format(bundle.gamma)
        lines.append(f"gamma diagnostic: {gamma}")

    status = 2 if bundle.termination is Termination.DIVERGED else 0

    if args.compare and status == 0:
        spec = derive_tpbvp(problem)
        cfg = TruncationConfig(t_end=args.t_end, mesh_points=args.mesh)
        t0 = time.perf_counter()
        try:
            oracle = solve_truncated(spec, cfg)
        except NewtonError as exc:
            lines.append(f"oracle: failed ({exc})")
            _write_summary(out, lines)
            return 3
        oracle_seconds = time.perf_counter() - t0
        result = compare(bundle, oracle, times)
        lines.append(f"oracle wall time: {oracle_seconds:.3f} s")
        lines.append(f"max deviation vs oracle: {_FMT.format(result.worst())}")
        for r, (dev, tmax) in enumerate(zip(result.max_dev, result.argmax_time)):
            lines.append(f"  component {r}: {_FMT.format(dev)} at t={tmax:g}")
        if result.worst() > args.compare_tol:
            lines.append(f"comparison FAILED (tolerance {args.compare_tol:g})")
            _write_summary(out, lines)
            return 3

    _write_summary(out, lines)
    return status


def _write_summary(out: Path, lines: list[str]) -> None:
    (out / "summary.txt").write_text("\n".join(lines) + "\n")
    for line in lines:
        print(line)


def _run_sweep(args, problem: OCProblem) -> int:
    axis, _, values = args.sweep.partition("=")
    axis = axis.strip()
    if axis not in ("hbar", "n", "beta"):
        return _fail(f"unknown sweep axis {axis!r} (expected hbar, n, or beta)")
    try:
        vals = [float(v) for v in values.split(",") if v.strip()]
    except ValueError:
        return _fail(f"bad sweep values {values!r}")
    if not vals:
        return _fail("empty sweep axis")

    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for v in vals:
        run_args = argparse.Namespace(**vars(args))
        if axis == "hbar":
            run_args.hbar = v
        elif axis == "n":
            run_args.n = int(v)
        else:
            run_args.beta = v
        config = _solver_config(run_args)
        if config is None:
            rows.append((v, "error", "", "", ""))
            continue
        try:
            bundle = solve_ocp(problem, config)
        except Exception as exc:  # record per-row failure, keep sweeping
            rows.append((v, f"error: {exc}", "", "", ""))
            continue
        rows.append(
            (
                v,
                bundle.termination.value,
                len(bundle.tail_norms) - 1,
                _FMT.format(bundle.tail_norms[-1]),
                _FMT.format(bundle.cost),
            )
        )

    path = out / "sweep.csv"
    with open(path, "w") as fh:
        fh.write(f"{axis},termination,orders_used,final_tail_norm,cost\n")
        for row in rows:
            fh.write(",".join(str(v) for v in row) + "\n")
    for row in rows:
        print(", ".join(str(v) for v in row))
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    problem = _load(args)
    if problem is None:
        return 1
    if args.sweep is not None:
        return _run_sweep(args, problem)
    config = _solver_config(args)
    if config is None:
        return 1
    try:
        return _run_single(args, problem, config)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 1


if __name__ == "__main__":
    sys.exit(main())
