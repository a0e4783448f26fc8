"""Finite-volume solver for u_t + u_x = 0 on periodic domains."""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from numba import njit

from . import io
from .errors import DomainMismatch, NonFiniteState, ZeroBaseline
from .kernels import IMRCollector, SchemeConfig, batch_states, imr_record, weno5
from .timeint import CflPolicy, dt_1d, first_nonfinite, rk3_update

NG = 3

# 5-point Gauss-Legendre rule on [-1, 1]
_GL_X, _GL_W = np.polynomial.legendre.leggauss(5)
_GL_WSUM = float(np.sum(_GL_W))


@dataclass(frozen=True)
class Grid1D:
    N: int
    x_l: float = -1.0
    x_r: float = 1.0

    def __post_init__(self):
        if self.N < 10:
            raise ValueError("N must be at least 10")
        if not self.x_r > self.x_l:
            raise ValueError("empty domain")

    @property
    def h(self):
        return (self.x_r - self.x_l) / self.N

    @property
    def length(self):
        return self.x_r - self.x_l

    @property
    def edges(self):
        return self.x_l + self.h * np.arange(self.N + 1)

    @property
    def centers(self):
        return self.x_l + self.h * (np.arange(self.N) + 0.5)

    def pad(self, u):
        v = np.zeros(self.N + 2 * NG)
        v[NG:NG + self.N] = u
        fill_periodic(v, self.N)
        return v


@njit(cache=True)
def fill_periodic(v, n):
    for g in range(NG):
        v[g] = v[n + g]
        v[n + NG + g] = v[NG + g]


# ---------------------------------------------------------------------------
# initial conditions


def _G(x, beta, z):
    return np.exp(-beta * (x - z) ** 2)


def _F(x, alpha, a):
    return np.sqrt(np.maximum(1.0 - alpha**2 * (x - a) ** 2, 0.0))


_Z, _DELTA, _A, _ALPHA = -0.7, 0.005, 0.5, 10.0
_BETA = math.log(2.0) / (36.0 * _DELTA**2)


def slp(x):
    x = np.asarray(x, dtype=float)
    u = np.zeros_like(x)
    m = (x >= -0.8) & (x <= -0.6)
    u[m] = (_G(x[m], _BETA, _Z - _DELTA) + 4.0 * _G(x[m], _BETA, _Z) + _G(x[m], _BETA, _Z + _DELTA)) / 6.0
    u[(x >= -0.4) & (x <= -0.2)] = 1.0
    m = (x >= 0.0) & (x <= 0.2)
    u[m] = 1.0 - np.abs(10.0 * (x[m] - 0.1))
    m = (x >= 0.4) & (x <= 0.6)
    u[m] = (_F(x[m], _ALPHA, _A - _DELTA) + 4.0 * _F(x[m], _ALPHA, _A) + _F(x[m], _ALPHA, _A + _DELTA)) / 6.0
    return u


def bicwp(x):
    x = np.asarray(x, dtype=float)
    u = np.zeros_like(x)
    half = ((x > -0.6) & (x <= -0.4)) | ((x > 0.2) & (x <= 0.4)) | ((x > 0.6) & (x <= 0.8))
    one = ((x > -0.8) & (x <= -0.6)) | ((x > -0.4) & (x <= -0.2)) | ((x > 0.4) & (x <= 0.6))
    u[half] = 0.5
    u[one] = 1.0
    return u


def hcp(x):
    x = np.asarray(x, dtype=float)
    return -np.exp(-((x - 5.0) ** 10)) * np.cos(np.pi * (x - 5.0)) ** 10


def step(x):
    return np.where(np.asarray(x, dtype=float) <= 0.0, 1.0, 0.0)


def sine(x):
    return np.sin(np.pi * np.asarray(x, dtype=float))


@dataclass(frozen=True)
class AdvectionProblem:
    name: str
    u0: Callable
    domain: tuple
    t_final: float
    cfl: CflPolicy
    # points where u0 or its derivative jumps; cells are split there
    breaks: tuple = ()


_ELLIPSE = tuple(
    _A + s * _DELTA + r / _ALPHA for s in (-1, 0, 1) for r in (-1, 1)
)

PROBLEMS = {
    "SLP": AdvectionProblem(
        "SLP", slp, (-1.0, 1.0), 2000.0, CflPolicy.fixed(0.1),
        (-0.8, -0.6, -0.4, -0.2, 0.0, 0.1, 0.2, 0.4, 0.6) + tuple(b for b in _ELLIPSE if 0.4 < b < 0.6),
    ),
    "BICWP": AdvectionProblem(
        "BiCWP", bicwp, (-1.0, 1.0), 2000.0, CflPolicy.fixed(0.1),
        (-0.8, -0.6, -0.4, -0.2, 0.2, 0.4, 0.6, 0.8),
    ),
    "HCP": AdvectionProblem("HCP", hcp, (3.5, 6.5), 300.0, CflPolicy.mesh_powered(2.0 / 3.0)),
    "STEP": AdvectionProblem("STEP", step, (-1.0, 1.0), 200.0, CflPolicy.fixed(0.1), (0.0,)),
    "SINE": AdvectionProblem("SINE", sine, (-1.0, 1.0), 2.0, CflPolicy.mesh_powered(2.0 / 3.0)),
}


def get_problem(name):
    if isinstance(name, AdvectionProblem):
        return name
    try:
        return PROBLEMS[str(name).upper()]
    except KeyError:
        raise KeyError(f"unknown advection problem {name!r}; choose from {sorted(PROBLEMS)}") from None


def make_grid(problem, N):
    problem = get_problem(problem)
    return Grid1D(N, *problem.domain)


def _check_domain(problem, grid):
    lo, hi = problem.domain
    if not (math.isclose(grid.x_l, lo) and math.isclose(grid.x_r, hi)):
        raise DomainMismatch(f"{problem.name} lives on {problem.domain}, grid is ({grid.x_l}, {grid.x_r})")


def cell_averages(problem, grid, t=0.0):
    """Averages of u0(x - t) over every cell, periodic in the problem's domain."""
    problem = get_problem(problem)
    _check_domain(problem, grid)
    L = grid.length
    shift = math.fmod(t, L)
    edges = grid.edges
    out = np.empty(grid.N)
    breaks = np.asarray(problem.breaks + (grid.x_l,), dtype=float)
    for j in range(grid.N):
        a = edges[j] - shift
        b = edges[j + 1] - shift
        # wrapped discontinuity positions falling strictly inside (a, b)
        k0 = math.floor((a - grid.x_r) / L)
        k1 = math.ceil((b - grid.x_l) / L)
        cand = (breaks[None, :] + L * np.arange(k0, k1 + 1)[:, None]).ravel()
        # breakpoints within roundoff of an edge would only add a sliver piece
        tol = 1e-12 * grid.h
        pts = np.concatenate(([a], np.sort(cand[(cand > a + tol) & (cand < b - tol)]), [b]))
        total = 0.0
        for lo, hi in zip(pts[:-1], pts[1:]):
            mid = 0.5 * (lo + hi)
            rad = 0.5 * (hi - lo)
            x = mid + rad * _GL_X
            # wrap into [x_l, x_r); all nodes of a piece share one image
            m = math.floor((mid - grid.x_l) / L)
            # dividing by the weight sum keeps constant pieces exact
            mean = float(np.dot(_GL_W, problem.u0(x - m * L))) / _GL_WSUM
            if len(pts) == 2:
                total = mean
                break
            total += (hi - lo) * mean
        out[j] = total if len(pts) == 2 else total / (b - a)
    return out


def initialize(problem, grid):
    return cell_averages(problem, grid, 0.0)


def exact_solution(problem, grid, t):
    if t < 0:
        raise ValueError("t must be non-negative")
    return cell_averages(problem, grid, t)


# ---------------------------------------------------------------------------
# spatial operator and time marching


@njit(cache=True)
def _rhs(v, n, h, scheme, eps, p, lop, out):
    # global Lax-Friedrichs with alpha = max|f'(u)| = 1
    fallbacks = 0
    fprev = 0.0
    for i in range(NG - 1, n + NG):
        uL, b1 = weno5(v[i - 2], v[i - 1], v[i], v[i + 1], v[i + 2], scheme, eps, p, lop)
        uR, b2 = weno5(v[i + 3], v[i + 2], v[i + 1], v[i], v[i - 1], scheme, eps, p, lop)
        f = 0.5 * (uL + uR - (uR - uL))
        fallbacks += b1 + b2
        if i >= NG:
            out[i] = -(f - fprev) / h
        fprev = f
    return fallbacks


@njit(cache=True)
def _march(v, n, h, cfl, t, t_final, scheme, eps, p, lop):
    v0 = v.copy()
    L = np.zeros_like(v)
    steps = 0
    fallbacks = 0
    while t < t_final:
        dt, last = dt_1d(cfl, h, 1.0, t, t_final)
        v0[:] = v
        for stage in range(3):
            fill_periodic(v, n)
            fallbacks += _rhs(v, n, h, scheme, eps, p, lop, L)
            rk3_update(v0, v, L, dt, stage)
        t = t_final if last else t + dt
        steps += 1
        bad = first_nonfinite(v)
        if bad >= 0:
            return t, steps, fallbacks, bad - NG
    fill_periodic(v, n)
    return t, steps, fallbacks, -1


def rhs(u, grid, cfg=SchemeConfig()):
    """du/dt for the cell averages ``u`` (length N) under periodic wrap."""
    v = grid.pad(np.asarray(u, dtype=float))
    out = np.zeros_like(v)
    _rhs(v, grid.N, grid.h, *cfg.args(), out)
    return out[NG:NG + grid.N]


@dataclass
class ErrorReport:
    L1: float
    L2: float
    Linf: float
    order_L1: Optional[float] = None
    order_Linf: Optional[float] = None
    chi1: Optional[float] = None
    chi2: Optional[float] = None
    fallbacks: int = 0
    steps: int = 0


def error_norms(numeric, exact, grid):
    e = np.asarray(exact, dtype=float) - np.asarray(numeric, dtype=float)
    h = grid.h if hasattr(grid, "h") else float(grid)
    return ErrorReport(
        L1=float(h * np.sum(np.abs(e))),
        L2=float(np.sqrt(np.sum(h * e * e))),
        Linf=float(np.max(np.abs(e))) if e.size else 0.0,
    )


def increased_errors(report, ilw_report):
    if ilw_report.L1 == 0 or ilw_report.L2 == 0:
        raise ZeroBaseline("baseline error is zero")
    chi1 = (report.L1 - ilw_report.L1) / ilw_report.L1 * 100.0
    chi2 = (report.L2 - ilw_report.L2) / ilw_report.L2 * 100.0
    return chi1, chi2


def orders(reports):
    """Fill ``order_L1``/``order_Linf`` between consecutive refinements."""
    for coarse, fine in zip(reports[:-1], reports[1:]):
        fine.order_L1 = _order(coarse.L1, fine.L1)
        fine.order_Linf = _order(coarse.Linf, fine.Linf)
    return reports


def _order(coarse, fine):
    if coarse > 0 and fine > 0:
        return math.log2(coarse / fine)
    return float("nan")


def record_imr(v, grid, cfg, t, collector):
    """Weights at every right cell face of the padded field ``v``."""
    n = grid.N
    idx = np.arange(NG, NG + n)
    windows = np.stack([v[idx + s] for s in (-2, -1, 0, 1, 2)], axis=1)
    st = batch_states(windows, cfg)
    for j in range(n):
        collector.extend(
            imr_record(_RowState(st.omega_js[j], st.omega_final[j]), cfg.scheme, j, t)
        )
    return collector


@dataclass
class _RowState:
    omega_js: np.ndarray
    omega_final: np.ndarray


def run(problem, grid, cfg=SchemeConfig(), imr=None, t_final=None, cfl=None):
    """March to ``t_final`` and compare against the translated exact solution.

    Returns ``(u, report)``. When ``imr`` is an :class:`IMRCollector`, the
    final-time weights at every interface are appended to it.
    """
    problem = get_problem(problem)
    if isinstance(grid, (int, np.integer)):
        grid = make_grid(problem, int(grid))
    t_final = problem.t_final if t_final is None else float(t_final)
    policy = problem.cfl if cfl is None else cfl
    u = initialize(problem, grid)
    v = grid.pad(u)
    t, steps, fallbacks, bad = _march(
        v, grid.N, grid.h, policy.number(grid.h), 0.0, t_final, *cfg.args()
    )
    if bad >= 0:
        raise NonFiniteState(f"non-finite value in cell {bad} at t={t}", time=t, cell=bad)
    u = v[NG:NG + grid.N].copy()
    report = error_norms(u, exact_solution(problem, grid, t_final), grid)
    report.fallbacks = int(fallbacks)
    report.steps = int(steps)
    if imr is not None:
        record_imr(v, grid, cfg, t_final, imr)
    return u, report


def write_solution(path, grid, u, exact):
    return io.write_csv(path, ("x", "u_numeric", "u_exact"), zip(grid.centers, u, exact))


def write_errors(path, Ns, reports):
    rows = [(N, r.L1, r.order_L1, r.Linf, r.order_Linf) for N, r in zip(Ns, reports)]
    return io.write_csv(path, ("N", "L1", "order_L1", "Linf", "order_Linf"), rows)
