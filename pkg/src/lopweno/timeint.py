"""Third-order SSP Runge-Kutta stepping and CFL step-size control."""

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import NonFiniteState, ZeroWaveSpeed

# Shu-Osher form: stage s gives  u <- A[s]*u0 + B[s]*(u + dt*L(u))
RK3_A = (0.0, 0.75, 1.0 / 3.0)
RK3_B = (1.0, 0.25, 2.0 / 3.0)
# time at which stage s evaluates L, as a fraction of dt
RK3_C = (0.0, 1.0, 0.5)


@njit(cache=True)
def rk3_update(u0, u, L, dt, stage):
    """Overwrite ``u`` with the Shu-Osher combination for ``stage`` (0, 1 or 2).

    Written as ``u0 + b*(u + dt*L - u0)``, equal to ``a*u0 + b*(u + dt*L)``
    since a + b = 1, so that a steady state stays bitwise steady.
    All three arrays must be C-contiguous with the same shape.
    """
    f0 = u0.reshape(u0.size)
    f = u.reshape(u.size)
    fl = L.reshape(L.size)
    if stage == 0:
        for i in range(f.size):
            f[i] = f[i] + dt * fl[i]
        return
    b = 0.25 if stage == 1 else 2.0 / 3.0
    for i in range(f.size):
        f[i] = f0[i] + b * (f[i] + dt * fl[i] - f0[i])


@njit(cache=True)
def first_nonfinite(u):
    f = u.reshape(u.size)
    for i in range(f.size):
        if not np.isfinite(f[i]):
            return i
    return -1


@njit(cache=True)
def truncate_dt(dt, t, t_final):
    remaining = t_final - t
    if dt >= remaining:
        return remaining, True
    return dt, False


@njit(cache=True)
def dt_1d(cfl, h, speed, t, t_final):
    return truncate_dt(cfl * h / speed, t, t_final)


@njit(cache=True)
def dt_2d(cfl, hx, hy, sx, sy, t, t_final):
    return truncate_dt(cfl / (sx / hx + sy / hy), t, t_final)


@dataclass(frozen=True)
class CflPolicy:
    """Either a fixed CFL number or ``CFL = h**exponent``."""

    mode: str = "fixed"
    value: float = 0.5

    def __post_init__(self):
        if self.mode not in ("fixed", "mesh_powered"):
            raise ValueError(f"unknown CFL mode {self.mode!r}")
        if not self.value > 0:
            raise ValueError("CFL value must be positive")

    @classmethod
    def fixed(cls, c):
        return cls("fixed", float(c))

    @classmethod
    def mesh_powered(cls, exponent):
        return cls("mesh_powered", float(exponent))

    def number(self, h):
        if self.mode == "fixed":
            return self.value
        return float(h) ** self.value

    def describe(self):
        if self.mode == "fixed":
            return f"{self.value:g}"
        return f"h^{self.value:g}"


def compute_dt(policy, h, max_wave_speed, t, t_final):
    """Stable step, truncated so that ``t + dt`` never passes ``t_final``.

    ``h`` and ``max_wave_speed`` are scalars in 1D or ``(x, y)`` pairs in 2D.
    """
    if np.ndim(h) == 0:
        if not max_wave_speed > 0:
            raise ZeroWaveSpeed("maximum wave speed must be positive")
        if not h > 0:
            raise ValueError("h must be positive")
        dt, _ = dt_1d(policy.number(h), float(h), float(max_wave_speed), float(t), float(t_final))
        return dt
    hx, hy = (float(v) for v in h)
    sx, sy = (float(v) for v in max_wave_speed)
    if not (sx >= 0 and sy >= 0 and sx + sy > 0):
        raise ZeroWaveSpeed("maximum wave speed must be positive")
    dt, _ = dt_2d(policy.number(min(hx, hy)), hx, hy, sx, sy, float(t), float(t_final))
    return dt


def ssp_rk3_step(state, rhs, dt, t=0.0):
    """One Shu-Osher SSP-RK3 step; ``rhs(u, t)`` returns dU/dt."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    u0 = np.ascontiguousarray(state, dtype=float)
    u = u0.copy()
    for stage in range(3):
        L = np.ascontiguousarray(rhs(u, t + RK3_C[stage] * dt), dtype=float)
        rk3_update(u0, u, L, dt, stage)
        bad = first_nonfinite(u)
        if bad >= 0:
            cell = np.unravel_index(bad, u.shape)
            raise NonFiniteState(
                f"non-finite value in RK stage {stage + 1} at index {cell}", time=t, cell=cell
            )
    return u
