"""Dimension-by-dimension 2D Euler solver.

The x-sweep runs the 4-component characteristic line operator over every row
and the y-sweep over every column (with the momentum components swapped so
the normal velocity always sits in slot 1). One flux is evaluated at each
edge midpoint and the two contributions are summed.
"""

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from numba import njit

from . import io
from .errors import DomainMismatch, NegativeDensity, NegativePressure, NegativeSoundSpeed, NonFiniteState, OutOfDomain
from .kernels import SchemeConfig, weno5
from .timeint import CflPolicy, RK3_C, dt_2d, first_nonfinite, rk3_update

NG = 3
OK, BAD_DENSITY, BAD_PRESSURE, BAD_SOUND_SPEED = 0, 1, 2, 3


@njit(cache=True)
def roe_eigen4(rhoL, uL, vL, HL, rhoR, uR, vR, HR, gamma, L, R):
    """Fill ``L``/``R`` (4x4) at the Roe state; returns c, or -1 if c^2 <= 0."""
    sl = math.sqrt(rhoL)
    sr = math.sqrt(rhoR)
    u = (sl * uL + sr * uR) / (sl + sr)
    v = (sl * vL + sr * vR) / (sl + sr)
    H = (sl * HL + sr * HR) / (sl + sr)
    q2 = u * u + v * v
    c2 = (gamma - 1.0) * (H - 0.5 * q2)
    if not c2 > 0:
        return -1.0
    c = math.sqrt(c2)
    b1 = (gamma - 1.0) / c2
    b2 = 0.5 * q2 * b1
    R[0, 0], R[0, 1], R[0, 2], R[0, 3] = 1.0, 1.0, 0.0, 1.0
    R[1, 0], R[1, 1], R[1, 2], R[1, 3] = u - c, u, 0.0, u + c
    R[2, 0], R[2, 1], R[2, 2], R[2, 3] = v, v, 1.0, v
    R[3, 0], R[3, 1], R[3, 2], R[3, 3] = H - u * c, 0.5 * q2, v, H + u * c
    L[0, 0], L[0, 1], L[0, 2], L[0, 3] = 0.5 * (b2 + u / c), -0.5 * (b1 * u + 1.0 / c), -0.5 * b1 * v, 0.5 * b1
    L[1, 0], L[1, 1], L[1, 2], L[1, 3] = 1.0 - b2, b1 * u, b1 * v, -b1
    L[2, 0], L[2, 1], L[2, 2], L[2, 3] = -v, 0.0, 1.0, 0.0
    L[3, 0], L[3, 1], L[3, 2], L[3, 3] = 0.5 * (b2 - u / c), -0.5 * (b1 * u - 1.0 / c), -0.5 * b1 * v, 0.5 * b1
    return c


@njit(cache=True)
def _pressure4(q0, q1, q2, q3, gamma):
    return (gamma - 1.0) * (q3 - 0.5 * (q1 * q1 + q2 * q2) / q0)


@njit(cache=True)
def _line_rhs4(q, n, h, gamma, alpha, scheme, eps, p, lop, out, flux, wl, wr):
    """x-direction flux difference on a padded (4, n+6) line."""
    fallbacks = 0
    L = np.empty((4, 4))
    R = np.empty((4, 4))
    for i in range(NG - 1, n + NG):
        rL = q[0, i]
        uL = q[1, i] / rL
        vL = q[2, i] / rL
        # grouped so that v = 0 reproduces the 1D arithmetic bit for bit
        pL = (gamma - 1.0) * (q[3, i] - (0.5 * rL * uL * uL + 0.5 * rL * vL * vL))
        rR = q[0, i + 1]
        uR = q[1, i + 1] / rR
        vR = q[2, i + 1] / rR
        pR = (gamma - 1.0) * (q[3, i + 1] - (0.5 * rR * uR * uR + 0.5 * rR * vR * vR))
        HL = (q[3, i] + pL) / rL
        HR = (q[3, i + 1] + pR) / rR
        c = roe_eigen4(rL, uL, vL, HL, rR, uR, vR, HR, gamma, L, R)
        if c < 0:
            return fallbacks, BAD_SOUND_SPEED, i - NG
        for k in range(4):
            l0, l1, l2, l3 = L[k, 0], L[k, 1], L[k, 2], L[k, 3]
            w0 = l0 * q[0, i - 2] + l1 * q[1, i - 2] + l2 * q[2, i - 2] + l3 * q[3, i - 2]
            w1 = l0 * q[0, i - 1] + l1 * q[1, i - 1] + l2 * q[2, i - 1] + l3 * q[3, i - 1]
            w2 = l0 * q[0, i] + l1 * q[1, i] + l2 * q[2, i] + l3 * q[3, i]
            w3 = l0 * q[0, i + 1] + l1 * q[1, i + 1] + l2 * q[2, i + 1] + l3 * q[3, i + 1]
            w4 = l0 * q[0, i + 2] + l1 * q[1, i + 2] + l2 * q[2, i + 2] + l3 * q[3, i + 2]
            w5 = l0 * q[0, i + 3] + l1 * q[1, i + 3] + l2 * q[2, i + 3] + l3 * q[3, i + 3]
            a, f1 = weno5(w0, w1, w2, w3, w4, scheme, eps, p, lop)
            b, f2 = weno5(w5, w4, w3, w2, w1, scheme, eps, p, lop)
            fallbacks += f1 + f2
            wl[k] = a
            wr[k] = b
        a0 = R[0, 0] * wl[0] + R[0, 1] * wl[1] + R[0, 2] * wl[2] + R[0, 3] * wl[3]
        a1 = R[1, 0] * wl[0] + R[1, 1] * wl[1] + R[1, 2] * wl[2] + R[1, 3] * wl[3]
        a2 = R[2, 0] * wl[0] + R[2, 1] * wl[1] + R[2, 2] * wl[2] + R[2, 3] * wl[3]
        a3 = R[3, 0] * wl[0] + R[3, 1] * wl[1] + R[3, 2] * wl[2] + R[3, 3] * wl[3]
        b0 = R[0, 0] * wr[0] + R[0, 1] * wr[1] + R[0, 2] * wr[2] + R[0, 3] * wr[3]
        b1 = R[1, 0] * wr[0] + R[1, 1] * wr[1] + R[1, 2] * wr[2] + R[1, 3] * wr[3]
        b2 = R[2, 0] * wr[0] + R[2, 1] * wr[1] + R[2, 2] * wr[2] + R[2, 3] * wr[3]
        b3 = R[3, 0] * wr[0] + R[3, 1] * wr[1] + R[3, 2] * wr[2] + R[3, 3] * wr[3]
        ua = a1 / a0
        va = a2 / a0
        pa = (gamma - 1.0) * (a3 - 0.5 * (a1 * ua + a2 * va))
        ub = b1 / b0
        vb = b2 / b0
        pb = (gamma - 1.0) * (b3 - 0.5 * (b1 * ub + b2 * vb))
        flux[0, i] = 0.5 * (a1 + b1 - alpha * (b0 - a0))
        flux[1, i] = 0.5 * (a1 * ua + pa + b1 * ub + pb - alpha * (b1 - a1))
        flux[2, i] = 0.5 * (a2 * ua + b2 * ub - alpha * (b2 - a2))
        flux[3, i] = 0.5 * (ua * (a3 + pa) + ub * (b3 + pb) - alpha * (b3 - a3))
    for i in range(NG, n + NG):
        for j in range(4):
            out[j, i] = -(flux[j, i] - flux[j, i - 1]) / h
    return fallbacks, OK, -1


@njit(cache=True)
def _mirror_solid(buf, solid, m):
    """Fill up to three solid cells next to each fluid/solid face by reflection."""
    for s in range(1, m):
        if solid[s] and not solid[s - 1]:
            for g in range(NG):
                if s + g < m and solid[s + g] and s - 1 - g >= 0:
                    for c in range(4):
                        buf[c, s + g] = buf[c, s - 1 - g]
                    buf[1, s + g] = -buf[1, s + g]
    for e in range(m - 2, -1, -1):
        if solid[e] and not solid[e + 1]:
            for g in range(NG):
                if e - g >= 0 and solid[e - g] and e + 1 + g < m:
                    for c in range(4):
                        buf[c, e - g] = buf[c, e + 1 + g]
                    buf[1, e - g] = -buf[1, e - g]


@njit(cache=True)
def max_speeds(U, nx, ny, gamma, solid):
    """(max |u|+c, max |v|+c, status, i, j) over interior fluid cells."""
    sx = 0.0
    sy = 0.0
    for j in range(NG, ny + NG):
        for i in range(NG, nx + NG):
            if solid[j, i]:
                continue
            rho = U[0, j, i]
            if not rho > 0:
                return sx, sy, BAD_DENSITY, i - NG, j - NG
            u = U[1, j, i] / rho
            v = U[2, j, i] / rho
            pr = (gamma - 1.0) * (U[3, j, i] - (0.5 * rho * u * u + 0.5 * rho * v * v))
            if not pr > 0:
                return sx, sy, BAD_PRESSURE, i - NG, j - NG
            c = math.sqrt(gamma * pr / rho)
            if abs(u) + c > sx:
                sx = abs(u) + c
            if abs(v) + c > sy:
                sy = abs(v) + c
    return sx, sy, OK, -1, -1


@njit(cache=True)
def _rhs2d(U, nx, ny, h, gamma, gravity, scheme, eps, p, lop, solid, out):
    """Returns (fallbacks, status, i, j)."""
    has_solid = False
    for j in range(ny + 2 * NG):
        for i in range(nx + 2 * NG):
            if solid[j, i]:
                has_solid = True
    sx, sy, status, ci, cj = max_speeds(U, nx, ny, gamma, solid)
    if status != OK:
        return 0, status, ci, cj
    out[:] = 0.0
    fallbacks = 0
    wl = np.empty(4)
    wr = np.empty(4)
    mx = nx + 2 * NG
    bx = np.empty((4, mx))
    ox = np.zeros((4, mx))
    fx = np.zeros((4, mx))
    for j in range(NG, ny + NG):
        for c in range(4):
            for i in range(mx):
                bx[c, i] = U[c, j, i]
        if has_solid:
            _mirror_solid(bx, solid[j, :], mx)
        fb, status, cell = _line_rhs4(bx, nx, h, gamma, sx, scheme, eps, p, lop, ox, fx, wl, wr)
        fallbacks += fb
        if status != OK:
            return fallbacks, status, cell, j - NG
        for c in range(4):
            for i in range(NG, nx + NG):
                if not solid[j, i]:
                    out[c, j, i] += ox[c, i]
    my = ny + 2 * NG
    by = np.empty((4, my))
    oy = np.zeros((4, my))
    fy = np.zeros((4, my))
    sj = np.empty(my, dtype=np.bool_)
    for i in range(NG, nx + NG):
        for j in range(my):
            by[0, j] = U[0, j, i]
            by[1, j] = U[2, j, i]
            by[2, j] = U[1, j, i]
            by[3, j] = U[3, j, i]
            sj[j] = solid[j, i]
        if has_solid:
            _mirror_solid(by, sj, my)
        fb, status, cell = _line_rhs4(by, ny, h, gamma, sy, scheme, eps, p, lop, oy, fy, wl, wr)
        fallbacks += fb
        if status != OK:
            return fallbacks, status, i - NG, cell
        for j in range(NG, ny + NG):
            if not solid[j, i]:
                out[0, j, i] += oy[0, j]
                out[1, j, i] += oy[2, j]
                out[2, j, i] += oy[1, j]
                out[3, j, i] += oy[3, j]
    if gravity != 0.0:
        for j in range(NG, ny + NG):
            for i in range(NG, nx + NG):
                if not solid[j, i]:
                    out[2, j, i] += gravity * U[0, j, i]
                    out[3, j, i] += gravity * U[2, j, i]
    return fallbacks, OK, -1, -1


# ---------------------------------------------------------------------------
# boundary descriptors


@dataclass(frozen=True)
class BoundarySpec:
    """Ghost-layer rule for one edge.

    ``kind`` is one of periodic, reflective, transmissive, dirichlet, inflow,
    outflow, dmr_top, dmr_bottom. ``values`` holds primitive (rho, u, v, p)
    for dirichlet and inflow.
    """

    kind: str
    values: Optional[tuple] = None

    KINDS = ("periodic", "reflective", "transmissive", "dirichlet", "inflow", "outflow", "dmr_top", "dmr_bottom")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown boundary kind {self.kind!r}")
        if self.kind in ("dirichlet", "inflow") and self.values is None:
            raise ValueError(f"{self.kind} boundary needs values")


def to_conserved(rho, u, v, p, gamma):
    rho = np.asarray(rho, dtype=float)
    return np.array([rho, rho * u, rho * v, np.asarray(p, dtype=float) / (gamma - 1.0) + 0.5 * rho * (u * u + v * v)])


def to_primitive(U, gamma):
    rho = U[0]
    u = U[1] / rho
    v = U[2] / rho
    p = (gamma - 1.0) * (U[3] - 0.5 * rho * (u * u + v * v))
    return rho, u, v, p


# ---------------------------------------------------------------------------
# problems


_THETA = math.pi / 6.0
_X0 = 1.0 / 6.0
DMR_POST = (8.0, 8.25 * math.cos(_THETA), -8.25 * math.sin(_THETA), 116.5)
DMR_PRE = (1.4, 0.0, 0.0, 1.0)
RSR_TOP = (1.69997, 2.61934, -0.50632, 1.52819)


def dmr_shock_x(y, t):
    """x-position of the Mach 10 oblique shock at height ``y`` and time ``t``."""
    return _X0 + (y + 20.0 * t) / math.sqrt(3.0)


def _acc1(X, Y, g):
    return 1.0 + 0.2 * np.sin(np.pi * (X + Y)), 0.7, 0.3, 1.0


def _acc2(X, Y, g):
    s = np.pi * (X + Y)
    return 1.0 + 0.2 * np.sin(s - np.sin(s) / np.pi), 0.7, 0.3, 1.0


def _blast(X, Y, g):
    p = np.where(X < 0.1, 1000.0, np.where(X < 0.9, 0.01, 100.0))
    return np.ones_like(X), 0.0, 0.0, p


def _implosion(X, Y, g):
    inside = np.sqrt(X * X + Y * Y) < 0.4
    return np.where(inside, 1.0, 0.125), 0.0, 0.0, np.where(inside, 1.0, 0.1)


def _explosion(X, Y, g):
    inside = np.sqrt(X * X + Y * Y) < 4.0
    return np.where(inside, 2.0, 1.0), 0.0, 0.0, np.where(inside, 5.0, 1.0)


SVI = dict(eps=0.3, rc=0.05, alpha=0.204, xc=0.25, yc=0.5, pR=1.3)


def _svi(X, Y, g):
    eps, rc, a, xc, yc, pR = (SVI[k] for k in ("eps", "rc", "alpha", "xc", "yc", "pR"))
    rhoL, uL, vL, pL = 1.0, math.sqrt(g), 0.0, 1.0
    rhoR = rhoL * (g - 1.0 + (g + 1.0) * pR) / (g + 1.0 + (g - 1.0) * pR)
    uR = uL * (1.0 - pR) / math.sqrt(g - 1.0 + pR * (g + 1.0))
    r2 = ((X - xc) ** 2 + (Y - yc) ** 2) / rc**2
    e = np.exp(a * (1.0 - r2))
    dT = -(g - 1.0) * eps**2 * np.exp(2.0 * a * (1.0 - r2)) / (4.0 * a * g)
    drho = rhoL**2 / ((g - 1.0) * pL) * dT
    du = eps * (Y - yc) / rc * e
    dv = -eps * (X - xc) / rc * e
    dp = g * rhoL**2 / ((g - 1.0) * rhoL) * dT
    left = X < 0.5
    return (
        np.where(left, rhoL + drho, rhoR),
        np.where(left, uL + du, uR),
        np.where(left, vL + dv, 0.0),
        np.where(left, pL + dp, pR),
    )


def _uniform(state):
    def ic(X, Y, g):
        return tuple(np.full_like(X, v) for v in state)

    return ic


def _dmr(X, Y, g):
    post = X < _X0 + Y / math.sqrt(3.0)
    return tuple(np.where(post, a, b) for a, b in zip(DMR_POST, DMR_PRE))


def _rti(X, Y, g):
    low = Y <= 0.5
    rho = np.where(low, 2.0, 1.0)
    p = np.where(low, 2.0 * Y + 1.0, Y + 1.5)
    c = np.sqrt(g * p / rho)
    return rho, 0.0, -0.025 * c * np.cos(8.0 * np.pi * X), p


def _ffs_solid(X, Y):
    return (X > 0.6) & (Y < 0.2)


@dataclass(frozen=True)
class Problem2D:
    id: str
    domain: tuple  # ((x0, x1), (y0, y1))
    resolution: tuple  # (nx, ny)
    t_final: float
    ic: Callable
    bc: dict
    cfl: CflPolicy = CflPolicy.fixed(0.5)
    gamma: float = 1.4
    gravity: float = 0.0
    solid: Optional[Callable] = None
    exact: Optional[Callable] = None
    desk_resolution: Optional[tuple] = None


def _translated(ic):
    def exact(X, Y, t, g):
        # periodic [-1, 1]^2 transport with (u, v) = (0.7, 0.3)
        Xs = (X - 0.7 * t + 1.0) % 2.0 - 1.0
        Ys = (Y - 0.3 * t + 1.0) % 2.0 - 1.0
        return ic(Xs, Ys, g)[0]

    return exact


_P = BoundarySpec("periodic")
_R = BoundarySpec("reflective")
_T = BoundarySpec("transmissive")

PROBLEMS = {
    "ACC1": Problem2D("ACC1", ((-1.0, 1.0), (-1.0, 1.0)), (80, 80), 2.0, _acc1,
                      dict(left=_P, right=_P, bottom=_P, top=_P), CflPolicy.mesh_powered(2.0 / 3.0),
                      exact=_translated(_acc1)),
    "ACC2": Problem2D("ACC2", ((-1.0, 1.0), (-1.0, 1.0)), (80, 80), 2.0, _acc2,
                      dict(left=_P, right=_P, bottom=_P, top=_P), CflPolicy.mesh_powered(2.0 / 3.0),
                      exact=_translated(_acc2)),
    "BLAST2D": Problem2D("BLAST2D", ((0.0, 1.0), (0.0, 0.4)), (300, 120), 0.038, _blast,
                         dict(left=_R, right=_R, bottom=_T, top=_T), desk_resolution=(150, 60)),
    "IMPLOSION": Problem2D("IMPLOSION", ((-20.0, 20.0), (-20.0, 20.0)), (400, 400), 4.2, _implosion,
                           dict(left=_R, right=_R, bottom=_R, top=_R), desk_resolution=(100, 100)),
    "EXPLOSION": Problem2D("EXPLOSION", ((-10.0, 10.0), (-10.0, 10.0)), (400, 400), 5.0, _explosion,
                           dict(left=_T, right=_T, bottom=_T, top=_T), desk_resolution=(100, 100)),
    "SVI": Problem2D("SVI", ((0.0, 1.0), (0.0, 1.0)), (800, 800), 0.6, _svi,
                     dict(left=_T, right=_T, bottom=_T, top=_T), desk_resolution=(200, 200)),
    "RSR": Problem2D("RSR", ((0.0, 4.0), (0.0, 1.0)), (800, 200), 2.5, _uniform((1.0, 2.9, 0.0, 1.0 / 1.4)),
                     dict(left=BoundarySpec("dirichlet", (1.0, 2.9, 0.0, 1.0 / 1.4)), right=_T,
                          bottom=_R, top=BoundarySpec("dirichlet", RSR_TOP)),
                     desk_resolution=(400, 100)),
    "DMR": Problem2D("DMR", ((0.0, 4.0), (0.0, 1.0)), (2000, 500), 0.2, _dmr,
                     dict(left=BoundarySpec("inflow", DMR_POST), right=BoundarySpec("outflow"),
                          bottom=BoundarySpec("dmr_bottom"), top=BoundarySpec("dmr_top")),
                     desk_resolution=(480, 120)),
    "FFS": Problem2D("FFS", ((0.0, 3.0), (0.0, 1.0)), (900, 300), 4.0, _uniform((1.4, 3.0, 0.0, 1.0)),
                     dict(left=BoundarySpec("inflow", (1.4, 3.0, 0.0, 1.0)), right=BoundarySpec("outflow"),
                          bottom=_R, top=_R),
                     solid=_ffs_solid, desk_resolution=(225, 75)),
    "RTI": Problem2D("RTI", ((0.0, 0.25), (0.0, 1.0)), (240, 960), 1.98, _rti,
                     dict(left=_R, right=_R, bottom=BoundarySpec("dirichlet", (2.0, 0.0, 0.0, 1.0)),
                          top=BoundarySpec("dirichlet", (1.0, 0.0, 0.0, 2.5))),
                     gamma=5.0 / 3.0, gravity=1.0, desk_resolution=(60, 240)),
}


def get_problem(name):
    if isinstance(name, Problem2D):
        return name
    try:
        return PROBLEMS[str(name).upper()]
    except KeyError:
        raise KeyError(f"unknown 2D problem {name!r}; choose from {sorted(PROBLEMS)}") from None


# ---------------------------------------------------------------------------
# grid


@dataclass
class FieldGrid2D:
    problem: Problem2D
    nx: int
    ny: int
    U: np.ndarray
    solid: np.ndarray
    t: float = 0.0

    @property
    def h(self):
        (x0, x1), _ = self.problem.domain
        return (x1 - x0) / self.nx

    @property
    def hx(self):
        return self.h

    @property
    def hy(self):
        (_, _), (y0, y1) = self.problem.domain
        return (y1 - y0) / self.ny

    @property
    def gamma(self):
        return self.problem.gamma

    @property
    def x(self):
        (x0, _), _ = self.problem.domain
        return x0 + self.hx * (np.arange(self.nx) + 0.5)

    @property
    def y(self):
        _, (y0, _) = self.problem.domain
        return y0 + self.hy * (np.arange(self.ny) + 0.5)

    def padded_coords(self):
        (x0, _), (y0, _) = self.problem.domain
        xp = x0 + self.hx * (np.arange(-NG, self.nx + NG) + 0.5)
        yp = y0 + self.hy * (np.arange(-NG, self.ny + NG) + 0.5)
        return xp, yp

    @property
    def interior(self):
        return self.U[:, NG:NG + self.ny, NG:NG + self.nx]

    @property
    def fluid(self):
        return ~self.solid[NG:NG + self.ny, NG:NG + self.nx]

    def primitives(self):
        return to_primitive(self.interior, self.gamma)

    @property
    def rho(self):
        return self.interior[0]


def make_grid(problem, resolution=None):
    problem = get_problem(problem)
    if resolution is None:
        nx, ny = problem.resolution
    elif np.ndim(resolution) == 0:
        # scalar N keeps the problem's aspect ratio
        nx0, ny0 = problem.resolution
        nx, ny = int(resolution), int(round(int(resolution) * ny0 / nx0))
    else:
        nx, ny = (int(v) for v in resolution)
    (x0, x1), (y0, y1) = problem.domain
    if not math.isclose((x1 - x0) / nx, (y1 - y0) / ny, rel_tol=1e-12):
        raise DomainMismatch(f"{problem.id}: {nx}x{ny} does not give square cells")
    U = np.zeros((4, ny + 2 * NG, nx + 2 * NG))
    grid = FieldGrid2D(problem, nx, ny, U, np.zeros((ny + 2 * NG, nx + 2 * NG), dtype=np.bool_))
    if problem.solid is not None:
        xp, yp = grid.padded_coords()
        X, Y = np.meshgrid(xp, yp)
        grid.solid = np.ascontiguousarray(problem.solid(X, Y))
    return grid


def initialize2d(problem, resolution=None):
    """Point-sampled primitive IC at cell centres, stored as conserved variables."""
    grid = make_grid(problem, resolution)
    problem = grid.problem
    X, Y = np.meshgrid(grid.x, grid.y)
    rho, u, v, p = (np.broadcast_to(np.asarray(a, dtype=float), X.shape) for a in problem.ic(X, Y, problem.gamma))
    grid.U[:, NG:NG + grid.ny, NG:NG + grid.nx] = to_conserved(rho, u, v, p, problem.gamma)
    if problem.solid is not None:
        # keep a valid state inside the step so stale cells never break arithmetic
        xp, yp = grid.padded_coords()
        Xp, Yp = np.meshgrid(xp, yp)
        base = np.array(to_conserved(*(np.broadcast_to(np.asarray(a, dtype=float), Xp.shape)
                                       for a in problem.ic(Xp, Yp, problem.gamma)), problem.gamma))
        grid.U[:, grid.solid] = base[:, grid.solid]
    apply_boundaries(grid, 0.0)
    return grid


# ---------------------------------------------------------------------------
# ghost layers


def _state(values, gamma):
    return np.array(to_conserved(*values, gamma), dtype=float)


def _fill_x(U, nx, spec, side, gamma, rows):
    if side == "left":
        ghost = [NG - 1 - g for g in range(NG)]
        inner = [NG + g for g in range(NG)]
        edge = NG
        per = [nx + NG - 1 - g for g in range(NG)]
    else:
        ghost = [nx + NG + g for g in range(NG)]
        inner = [nx + NG - 1 - g for g in range(NG)]
        edge = nx + NG - 1
        per = [NG + g for g in range(NG)]
    k = spec.kind
    for g in range(NG):
        gi = ghost[g]
        if k == "periodic":
            U[:, rows, gi] = U[:, rows, per[g]]
        elif k in ("transmissive", "outflow"):
            U[:, rows, gi] = U[:, rows, edge]
        elif k == "reflective":
            U[:, rows, gi] = U[:, rows, inner[g]]
            U[1, rows, gi] = -U[1, rows, inner[g]]
        elif k in ("dirichlet", "inflow"):
            U[:, rows, gi] = _state(spec.values, gamma)[:, None]
        else:
            raise ValueError(f"{k} is not valid on an x edge")


def _fill_y(grid, spec, side, t):
    U, ny, nx, gamma = grid.U, grid.ny, grid.nx, grid.gamma
    cols = np.s_[NG:nx + NG]
    if side == "bottom":
        ghost = [NG - 1 - g for g in range(NG)]
        inner = [NG + g for g in range(NG)]
        edge = NG
        per = [ny + NG - 1 - g for g in range(NG)]
    else:
        ghost = [ny + NG + g for g in range(NG)]
        inner = [ny + NG - 1 - g for g in range(NG)]
        edge = ny + NG - 1
        per = [NG + g for g in range(NG)]
    k = spec.kind
    x = grid.x
    for g in range(NG):
        gj = ghost[g]
        if k == "periodic":
            U[:, gj, cols] = U[:, per[g], cols]
        elif k in ("transmissive", "outflow"):
            U[:, gj, cols] = U[:, edge, cols]
        elif k == "reflective":
            U[:, gj, cols] = U[:, inner[g], cols]
            U[2, gj, cols] = -U[2, inner[g], cols]
        elif k in ("dirichlet", "inflow"):
            U[:, gj, cols] = _state(spec.values, gamma)[:, None]
        elif k == "dmr_bottom":
            post = x < _X0
            mirrored = U[:, inner[g], cols].copy()
            mirrored[2] = -mirrored[2]
            U[:, gj, cols] = np.where(post[None, :], _state(DMR_POST, gamma)[:, None], mirrored)
        elif k == "dmr_top":
            # foot of the shock on the top edge, used for all ghost rows
            _, (_, y1) = grid.problem.domain
            post = x < dmr_shock_x(y1, t)
            U[:, gj, cols] = np.where(post[None, :], _state(DMR_POST, gamma)[:, None], _state(DMR_PRE, gamma)[:, None])
        else:
            raise ValueError(f"unknown boundary kind {k}")


def apply_boundaries(grid, t=0.0, spec=None):
    """Fill the three ghost layers on every edge for time ``t``."""
    if t < 0:
        raise ValueError("t must be non-negative")
    spec = grid.problem.bc if spec is None else spec
    rows = np.s_[NG:grid.ny + NG]
    _fill_x(grid.U, grid.nx, spec["left"], "left", grid.gamma, rows)
    _fill_x(grid.U, grid.nx, spec["right"], "right", grid.gamma, rows)
    _fill_y(grid, spec["bottom"], "bottom", t)
    _fill_y(grid, spec["top"], "top", t)
    return grid


# ---------------------------------------------------------------------------
# operators and marching


def _raise_status(status, i, j, t):
    if status == BAD_DENSITY:
        raise NegativeDensity((i, j))
    if status == BAD_PRESSURE:
        raise NegativePressure((i, j))
    if status == BAD_SOUND_SPEED:
        raise NegativeSoundSpeed(f"Roe-averaged sound speed is not real near cell {(i, j)}")


def rhs2d(grid, cfg=SchemeConfig(), t=None):
    """Time derivative of the interior conserved variables, shape (4, ny, nx)."""
    if t is not None:
        apply_boundaries(grid, t)
    out = np.zeros_like(grid.U)
    _, status, i, j = _rhs2d(grid.U, grid.nx, grid.ny, grid.h, grid.gamma, grid.problem.gravity,
                             *cfg.args(), grid.solid, out)
    _raise_status(status, i, j, grid.t)
    return out[:, NG:NG + grid.ny, NG:NG + grid.nx]


@dataclass
class Run2D:
    grid: FieldGrid2D
    steps: int = 0
    fallbacks: int = 0
    linf: Optional[float] = None
    oscillation: Optional[float] = None


def march2d(grid, cfg, t_final, cfl=None, fixed_dt=None, max_steps=None):
    """Advance ``grid`` in place with SSP-RK3; returns (steps, fallbacks)."""
    problem = grid.problem
    policy = problem.cfl if cfl is None else cfl
    number = policy.number(grid.h)
    args = cfg.args()
    U = grid.U
    U0 = np.empty_like(U)
    L = np.zeros_like(U)
    steps = 0
    fallbacks = 0
    while grid.t < t_final and (max_steps is None or steps < max_steps):
        t = grid.t
        apply_boundaries(grid, t)
        if fixed_dt:
            dt, last = float(fixed_dt), False
        else:
            sx, sy, status, i, j = max_speeds(U, grid.nx, grid.ny, grid.gamma, grid.solid)
            _raise_status(status, i, j, t)
            dt, last = dt_2d(number, grid.hx, grid.hy, sx, sy, t, t_final)
        U0[:] = U
        for stage in range(3):
            if stage:
                apply_boundaries(grid, t + RK3_C[stage] * dt)
            fb, status, i, j = _rhs2d(U, grid.nx, grid.ny, grid.h, grid.gamma, problem.gravity,
                                      *args, grid.solid, L)
            fallbacks += fb
            _raise_status(status, i, j, t)
            rk3_update(U0, U, L, dt, stage)
        # masked cells keep their stale values
        grid.t = t_final if last else t + dt
        steps += 1
        bad = first_nonfinite(grid.interior.copy())
        if bad >= 0:
            c, j, i = np.unravel_index(bad, grid.interior.shape)
            raise NonFiniteState(f"non-finite value at cell {(i, j)} t={grid.t}", time=grid.t, cell=(i, j))
    apply_boundaries(grid, grid.t)
    return steps, fallbacks


def linf_density_error(grid, exact):
    """max |rho_exact - rho| over fluid cells; ``exact`` is an array or the problem's exact solution."""
    if exact is None or callable(exact):
        fn = exact or grid.problem.exact
        X, Y = np.meshgrid(grid.x, grid.y)
        exact = fn(X, Y, grid.t, grid.gamma)
    err = np.abs(np.asarray(exact) - grid.rho)
    return float(np.max(err[grid.fluid]))


def slice(grid, axis, coordinate, field="rho"):
    """Row (``axis='y'``) or column (``axis='x'``) nearest ``coordinate``.

    Returns ``(positions, values)``.
    """
    prim = dict(zip(("rho", "u", "v", "p"), grid.primitives()))[field]
    (x0, x1), (y0, y1) = grid.problem.domain
    if axis == "y":
        if not y0 <= coordinate <= y1:
            raise OutOfDomain(f"y={coordinate} outside [{y0}, {y1}]")
        j = int(np.argmin(np.abs(grid.y - coordinate)))
        return grid.x.copy(), prim[j, :].copy()
    if axis == "x":
        if not x0 <= coordinate <= x1:
            raise OutOfDomain(f"x={coordinate} outside [{x0}, {x1}]")
        i = int(np.argmin(np.abs(grid.x - coordinate)))
        return grid.y.copy(), prim[:, i].copy()
    raise ValueError("axis must be 'x' or 'y'")


def oscillation_metric(values):
    """Total variation in excess of a monotone transit between the end values."""
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        return 0.0
    return float(np.sum(np.abs(np.diff(v))) - abs(v[-1] - v[0]))


# slice windows used for the post-shock oscillation diagnostic
OSCILLATION_WINDOWS = {
    "RSR": ("y", 0.5, (0.9, 1.1)),
    "SVI": ("y", 0.3, (0.44, 0.54)),
}


def window_oscillation(grid, axis, coordinate, bounds):
    pos, rho = slice(grid, axis, coordinate)
    m = (pos >= bounds[0]) & (pos <= bounds[1])
    return oscillation_metric(rho[m])


def run2d(problem, cfg=SchemeConfig(), resolution=None, t_final=None, cfl=None, full=False):
    """Initialize, march to ``t_final`` and collect diagnostics."""
    problem = get_problem(problem)
    if resolution is None and not full and problem.desk_resolution is not None:
        resolution = problem.desk_resolution
    grid = initialize2d(problem, resolution)
    t_final = problem.t_final if t_final is None else float(t_final)
    steps, fb = march2d(grid, cfg, t_final, cfl)
    result = Run2D(grid, steps, fb)
    if problem.exact is not None:
        result.linf = linf_density_error(grid, None)
    if problem.id in OSCILLATION_WINDOWS:
        result.oscillation = window_oscillation(grid, *OSCILLATION_WINDOWS[problem.id])
    return result


def write_field(path, grid):
    rho, u, v, p = grid.primitives()
    X, Y = np.meshgrid(grid.x, grid.y)
    fluid = grid.fluid
    rows = zip(X[fluid], Y[fluid], rho[fluid], u[fluid], v[fluid], p[fluid])
    return io.write_csv(path, ("x", "y", "rho", "u", "v", "p"), rows)


def write_slice(path, positions, values, label="x"):
    return io.write_csv(path, (label, "rho"), zip(positions, values))
