"""Run configuration, convergence sweeps and table emitters."""

import hashlib
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from . import advection, euler1d, euler2d, io
from .kernels import Scheme, SchemeConfig, reconstruct_interface
from .timeint import CflPolicy

WORKERS_ENV = "LOPWENO_WORKERS"
DX_LIST = (0.01, 0.005, 0.0025, 0.00125, 0.000625)


def build_id():
    """Hash of the package sources, stable across machines for identical code."""
    digest = hashlib.sha1()
    root = Path(__file__).resolve().parent
    for path in sorted(root.glob("*.py")):
        digest.update(path.name.encode())
        digest.update(path.read_bytes())
    return digest.hexdigest()[:12]


def workers():
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def problem_family(name):
    key = str(name).upper().replace("-", "_")
    if key in advection.PROBLEMS:
        return "advection"
    if key in euler1d.PROBLEMS:
        return "euler1d"
    if key in euler2d.PROBLEMS:
        return "euler2d"
    raise KeyError(f"unknown problem {name!r}")


@dataclass
class RunConfig:
    problem: str
    scheme: str = "z"
    lop: bool = False
    N: Optional[int] = None
    Ny: Optional[int] = None
    cfl: Optional[float] = None
    cfl_pow: Optional[float] = None
    t_final: Optional[float] = None
    epsilon: float = 1e-40
    p: int = 2
    out: str = "."
    seed: int = 0
    full: bool = False
    imr: bool = False

    def scheme_config(self):
        return SchemeConfig(Scheme.parse(self.scheme), self.epsilon, self.p, self.lop)

    def cfl_policy(self):
        if self.cfl is not None and self.cfl_pow is not None:
            raise ValueError("give either a fixed CFL or a mesh exponent, not both")
        if self.cfl is not None:
            return CflPolicy.fixed(self.cfl)
        if self.cfl_pow is not None:
            return CflPolicy.mesh_powered(self.cfl_pow)
        return None

    def metadata(self, **extra):
        cfg = self.scheme_config()
        meta = asdict(self)
        meta.update(
            label=cfg.label,
            build_id=build_id(),
            cfl_effective=self.cfl_policy().describe() if self.cfl_policy() else "default",
        )
        meta.update(extra)
        return meta

    @classmethod
    def from_metadata(cls, meta):
        names = cls.__dataclass_fields__
        return cls(**{k: v for k, v in meta.items() if k in names})


@dataclass
class ConvergenceTable:
    columns: tuple
    rows: List[tuple] = field(default_factory=list)

    def column(self, name):
        k = self.columns.index(name)
        return [r[k] for r in self.rows]


def _order(coarse, fine, ratio=2.0):
    if coarse > 0 and fine > 0:
        return math.log(coarse / fine) / math.log(ratio)
    return float("nan")


# ---------------------------------------------------------------------------
# critical-point test


_GL10 = np.polynomial.legendre.leggauss(10)


def cell_averages_xl_exp(edges, l=2):
    """Averages of x**l * exp(x) over consecutive cells, 10-point Gauss-Legendre.

    The rule is exact far below roundoff for these smooth cells; differencing a
    closed-form antiderivative instead loses ~1e-16/dx to cancellation.
    """
    edges = np.asarray(edges, dtype=float)
    mid = 0.5 * (edges[1:] + edges[:-1])
    rad = 0.5 * (edges[1:] - edges[:-1])
    x = mid[:, None] + rad[:, None] * _GL10[0][None, :]
    return 0.5 * (x**l * np.exp(x)) @ _GL10[1]


def critical_point_error(cfg, dx, l=2):
    """|u^L(0) - f(0)| at the cell face sitting on the critical point x = 0.

    Cells of width ``dx`` tile (-1, 1) with a face at x = 0; the window is the
    five cells centred at -2.5dx .. 1.5dx.
    """
    edges = dx * np.arange(-3, 3, dtype=float)
    u, state = reconstruct_interface(cell_averages_xl_exp(edges, l), cfg)
    return abs(u), state


def critical_point_test(l=2, dx_list=DX_LIST, schemes=None):
    """One (dx, linf, order) table per scheme, keyed by scheme label."""
    if schemes is None:
        schemes = default_schemes()
    tables = {}
    for cfg in schemes:
        table = ConvergenceTable(("dx", "linf", "order"))
        prev = None
        for dx in dx_list:
            err, _ = critical_point_error(cfg, dx, l)
            order = _order(prev[1], err, prev[0] / dx) if prev else None
            table.rows.append((dx, err, order))
            prev = (dx, err)
        tables[cfg.label] = table
    return tables


def default_schemes():
    out = [SchemeConfig("ILW"), SchemeConfig("JS")]
    for s in ("Z", "ZETA81", "A"):
        out += [SchemeConfig(s), SchemeConfig(s, lop=True)]
    return out


# ---------------------------------------------------------------------------
# convergence sweeps


def _single(args):
    problem, N, cfg, t_final, cfl = args
    family = problem_family(problem)
    if family == "advection":
        _, report = advection.run(problem, N, cfg, t_final=t_final, cfl=cfl)
        return report.L1, report.Linf
    if family == "euler2d":
        result = euler2d.run2d(problem, cfg, resolution=(N, N), t_final=t_final, cfl=cfl)
        return float("nan"), result.linf
    raise ValueError(f"no convergence sweep for {problem}")


def convergence_sweep(problem, N_list, cfg=SchemeConfig(), t_final=None, cfl=None, n_workers=None):
    """Rows (N, L1, order_L1, Linf, order_Linf); runs may go to a process pool."""
    n_workers = workers() if n_workers is None else n_workers
    jobs = [(problem, int(N), cfg, t_final, cfl) for N in N_list]
    if n_workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(_single, jobs))
    else:
        results = [_single(j) for j in jobs]
    table = ConvergenceTable(("N", "L1", "order_L1", "Linf", "order_Linf"))
    prev = None
    for N, (l1, linf) in sorted(zip(N_list, results)):
        if prev is None:
            table.rows.append((N, l1, None, linf, None))
        else:
            r = N / prev[0]
            table.rows.append((N, l1, _order(prev[1], l1, r), linf, _order(prev[2], linf, r)))
        prev = (N, l1, linf)
    return table


# ---------------------------------------------------------------------------
# output


def emit(table, path, metadata=None):
    """Write ``table`` as CSV and, when given, a ``.meta.json`` sidecar."""
    path = Path(path)
    io.write_csv(path, table.columns, table.rows)
    if metadata is not None:
        meta = dict(metadata)
        meta.setdefault("build_id", build_id())
        io.write_json(path.with_suffix(".meta.json"), meta)
    return path
