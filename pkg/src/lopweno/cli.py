"""Command-line entry point.

Examples
--------
::

    lopweno run slp --scheme z --lop --n 200 --out out/slp
    lopweno run sod --scheme a --lop --n 300 --out out/sod
    lopweno run rsr --scheme zeta81 --out out/rsr
    lopweno critical-point --out out/table2
"""

import argparse
import re
import sys
import time
from pathlib import Path

import numpy as np

from . import advection, euler1d, euler2d, harness, io
from .errors import LopWenoError
from .kernels import IMRCollector

SCHEMES = ("js", "ilw", "z", "zeta81", "a")

# (problem, N) pairs whose paper settings are too heavy for a desk run
_HEAVY_1D = {"SLP": 400, "BICWP": 400}


def _add_common(p):
    p.add_argument("--scheme", choices=SCHEMES, default="z")
    p.add_argument("--lop", action="store_true", help="apply the order-preserving filter")
    p.add_argument("--eps", type=float, default=1e-40, dest="epsilon")
    p.add_argument("--p", type=int, default=2, choices=(1, 2))
    p.add_argument("--out", required=True, help="output directory")


def build_parser():
    parser = argparse.ArgumentParser(prog="lopweno", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one benchmark problem")
    run.add_argument("problem", type=str.upper)
    _add_common(run)
    run.add_argument("--n", type=int, dest="N", help="cells (x-direction for 2D)")
    cfl = run.add_mutually_exclusive_group()
    cfl.add_argument("--cfl", type=float)
    cfl.add_argument("--cfl-pow", type=float, dest="cfl_pow", help="use CFL = h**E")
    run.add_argument("--t", type=float, dest="t_final")
    run.add_argument("--imr", action="store_true", help="dump final-time weights (advection)")
    run.add_argument("--full", action="store_true", help="allow paper-scale resolutions")

    cp = sub.add_parser("critical-point", help="interface error at a critical point")
    cp.add_argument("--l", type=int, default=2)
    cp.add_argument("--out", required=True)

    sw = sub.add_parser("sweep", help="convergence sweep over N")
    sw.add_argument("problem", type=str.upper)
    _add_common(sw)
    sw.add_argument("--n", type=int, nargs="+", dest="Ns", required=True)
    sw.add_argument("--t", type=float, dest="t_final")
    return parser


def _run(args):
    cfg = harness.RunConfig(
        problem=args.problem, scheme=args.scheme, lop=args.lop, N=args.N, cfl=args.cfl,
        cfl_pow=args.cfl_pow, t_final=args.t_final, epsilon=args.epsilon, p=args.p,
        out=args.out, full=args.full, imr=args.imr,
    )
    out = Path(args.out)
    family = harness.problem_family(args.problem)
    scheme = cfg.scheme_config()
    policy = cfg.cfl_policy()
    start = time.perf_counter()
    extra = {}
    if family == "advection":
        problem = advection.get_problem(args.problem)
        N = args.N or 200
        t_final = problem.t_final if args.t_final is None else args.t_final
        if not args.full and N >= _HEAVY_1D.get(problem.name.upper(), 10**9) and t_final >= 2000:
            raise SystemExit(f"{problem.name} N={N} t={t_final:g} is a paper-scale run; pass --full")
        grid = advection.make_grid(problem, N)
        imr = IMRCollector() if args.imr else None
        u, report = advection.run(problem, grid, scheme, imr=imr, t_final=t_final, cfl=policy)
        advection.write_solution(out / "solution.csv", grid, u, advection.exact_solution(problem, grid, t_final))
        advection.write_errors(out / "errors.csv", [N], [report])
        if imr is not None:
            imr.write_csv(out / "imr.csv")
        extra = dict(L1=report.L1, L2=report.L2, Linf=report.Linf, fallbacks=report.fallbacks, steps=report.steps)
    elif family == "euler1d":
        N = args.N or 300
        cfl = policy.number(1.0) if policy is not None and policy.mode == "fixed" else 0.5
        result = euler1d.run(args.problem, N, scheme, t_final=args.t_final, cfl=cfl)
        euler1d.write_density(out / "density.csv", result)
        extra = dict(L1_density=result.L1, fallbacks=result.fallbacks, steps=result.steps)
    else:
        problem = euler2d.get_problem(args.problem)
        resolution = args.N if args.N is not None else (problem.resolution if args.full else None)
        result = euler2d.run2d(problem, scheme, resolution=resolution, t_final=args.t_final, cfl=policy, full=args.full)
        grid = result.grid
        euler2d.write_field(out / "field.csv", grid)
        axis, coord, bounds = euler2d.OSCILLATION_WINDOWS.get(problem.id, ("y", float(np.mean(problem.domain[1])), None))
        pos, rho = euler2d.slice(grid, axis, coord)
        euler2d.write_slice(out / "slice.csv", pos, rho, "x" if axis == "y" else "y")
        extra = dict(nx=grid.nx, ny=grid.ny, steps=result.steps, fallbacks=result.fallbacks,
                     linf=result.linf, oscillation=result.oscillation)
    extra["wall_seconds"] = time.perf_counter() - start
    io.write_json(out / "metadata.json", cfg.metadata(**extra))
    print(f"{scheme.label} {args.problem}: " + ", ".join(f"{k}={v}" for k, v in extra.items()))


def _critical(args):
    for label, table in harness.critical_point_test(args.l).items():
        stem = re.sub(r"[^\w.-]+", "_", label).strip("_")
        path = harness.emit(table, Path(args.out) / f"critical_point_{stem}.csv", {"l": args.l, "label": label})
        print(path)


def _sweep(args):
    cfg = harness.RunConfig(problem=args.problem, scheme=args.scheme, lop=args.lop,
                            epsilon=args.epsilon, p=args.p, out=args.out, t_final=args.t_final)
    table = harness.convergence_sweep(args.problem, args.Ns, cfg.scheme_config(), t_final=args.t_final)
    path = harness.emit(table, Path(args.out) / "errors.csv", cfg.metadata(Ns=list(args.Ns)))
    print(path)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        {"run": _run, "critical-point": _critical, "sweep": _sweep}[args.command](args)
    except (LopWenoError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
