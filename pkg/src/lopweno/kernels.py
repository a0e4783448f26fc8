"""Fifth-order WENO reconstruction kernels.

Every scheme shares the same pipeline at an interface ``x_{j+1/2}``::

    window -> smoothness indicators -> JS weights
           -> (Z-type) generalized mapping  alpha_k = lambda1_k + lambda2_k * omega_js_k
           -> (optional) locally order-preserving filter
           -> normalize -> sum_k omega_k * u_k

The numba-compiled scalar functions prefixed with an underscore are the single
source of truth for the arithmetic; the solvers call them directly from their
own compiled loops and the public Python functions below wrap them.
"""

import csv
import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np
from numba import njit

from .errors import MissingProvider
from .io import _atomic_write

D0, D1, D2 = 0.1, 0.6, 0.3
IDEAL_WEIGHTS = (D0, D1, D2)


class Scheme(enum.IntEnum):
    JS = 0
    ILW = 1
    Z = 2
    ZETA81 = 3
    A = 4

    @classmethod
    def parse(cls, name):
        if isinstance(name, cls):
            return name
        key = str(name).strip().upper().replace("-", "").replace("_", "")
        aliases = {"ZETA": "ZETA81", "ZETA81": "ZETA81", "ZETATAU81": "ZETA81"}
        return cls[aliases.get(key, key)]

    @property
    def z_type(self):
        return self in (Scheme.Z, Scheme.ZETA81, Scheme.A)


_LABELS = {
    Scheme.JS: "WENO-JS",
    Scheme.ILW: "WENO5-ILW",
    Scheme.Z: "WENO-Z",
    Scheme.ZETA81: "WENO-Zeta(tau81)",
    Scheme.A: "WENO-A",
}


@dataclass(frozen=True)
class SchemeConfig:
    """Fully determines the reconstruction map at an interface."""

    scheme: Scheme = Scheme.Z
    epsilon: float = 1e-40
    p: int = 2
    lop: bool = False

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme.parse(self.scheme))
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.p not in (1, 2):
            raise ValueError("p must be 1 or 2")
        object.__setattr__(self, "lop", bool(self.lop))

    @property
    def filtered(self):
        """True when the LOP filter actually runs (Z-type schemes only)."""
        return self.lop and self.scheme.z_type

    @property
    def label(self):
        base = _LABELS[self.scheme]
        if self.filtered:
            return "LOP-GM" + base
        return base

    def args(self):
        """Positional arguments consumed by the compiled kernels."""
        return int(self.scheme), float(self.epsilon), int(self.p), bool(self.filtered)


class SmoothnessState(NamedTuple):
    IS: tuple
    tau5: float
    phi: float
    aux: Optional[tuple] = None
    tau_aux: Optional[float] = None


class WeightState(NamedTuple):
    IS: tuple
    alpha_js: tuple
    omega_js: tuple
    lambda1: tuple
    lambda2: tuple
    alpha_x: tuple
    omega_final: tuple
    fallback: bool


@dataclass(frozen=True)
class IMRSample:
    k: int
    omega_js: float
    omega_x: float
    cell_index: int = -1
    time: float = 0.0


# ---------------------------------------------------------------------------
# compiled scalar kernels


@njit(cache=True)
def _ipow(x, p):
    if p == 2:
        return x * x
    r = 1.0
    for _ in range(p):
        r *= x
    return r


@njit(cache=True)
def _substencils(a, b, c, d, e):
    return (
        (2.0 * a - 7.0 * b + 11.0 * c) / 6.0,
        (-b + 5.0 * c + 2.0 * d) / 6.0,
        (2.0 * c + 5.0 * d - e) / 6.0,
    )


@njit(cache=True)
def _smoothness(a, b, c, d, e):
    s0 = a - 2.0 * b + c
    f0 = a - 4.0 * b + 3.0 * c
    s1 = b - 2.0 * c + d
    f1 = b - d
    s2 = c - 2.0 * d + e
    f2 = 3.0 * c - 4.0 * d + e
    return (
        13.0 / 12.0 * s0 * s0 + 0.25 * f0 * f0,
        13.0 / 12.0 * s1 * s1 + 0.25 * f1 * f1,
        13.0 / 12.0 * s2 * s2 + 0.25 * f2 * f2,
    )


@njit(cache=True)
def _eta_tau81(a, b, c, d, e):
    # eta_k: squared first and second derivatives of the point-value
    # Lagrange interpolant on each substencil, taken at the centre cell.
    # tau81: squared undivided fourth difference over the full stencil.
    f0 = 0.5 * (a - 4.0 * b + 3.0 * c)
    s0 = a - 2.0 * b + c
    f1 = 0.5 * (d - b)
    s1 = b - 2.0 * c + d
    f2 = 0.5 * (-3.0 * c + 4.0 * d - e)
    s2 = c - 2.0 * d + e
    q = a - 4.0 * b + 6.0 * c - 4.0 * d + e
    return f0 * f0 + s0 * s0, f1 * f1 + s1 * s1, f2 * f2 + s2 * s2, q * q


@njit(cache=True)
def _js_alpha(is0, is1, is2, eps):
    return (
        D0 / ((eps + is0) * (eps + is0)),
        D1 / ((eps + is1) * (eps + is1)),
        D2 / ((eps + is2) * (eps + is2)),
    )


@njit(cache=True)
def _global_indicators(is0, is1, is2):
    tau5 = abs(is0 - is2)
    phi = min(1.0, math.sqrt(abs(is0 - 2.0 * is1 + is2)))
    return tau5, phi


@njit(cache=True)
def _a_switch(phi, tau5, isk, eps, p):
    return 1.0 if phi * _ipow(tau5 / (isk + eps), p) <= 1.0 else 0.0


@njit(cache=True)
def _mapping(scheme, is0, is1, is2, sum_js, tau5, phi, eta0, eta1, eta2, tau81, eps, p):
    """lambda1, lambda2 of the generalized mapping for the Z-type schemes."""
    if scheme == 2:
        t = sum_js * _ipow(tau5, p)
        return D0, D1, D2, t, t, t
    if scheme == 3:
        t = sum_js * tau81 * tau81
        r0 = (is0 + eps) / (eta0 + eps)
        r1 = (is1 + eps) / (eta1 + eps)
        r2 = (is2 + eps) / (eta2 + eps)
        return D0, D1, D2, t * r0 * r0, t * r1 * r1, t * r2 * r2
    if scheme == 4:
        b0 = _a_switch(phi, tau5, is0, eps, p)
        b1 = _a_switch(phi, tau5, is1, eps, p)
        b2 = _a_switch(phi, tau5, is2, eps, p)
        t = sum_js * phi * _ipow(tau5, p)
        return (
            D0 * b0,
            D1 * b1,
            D2 * b2,
            t * _ipow(is0 + eps, 2 - p) * (1.0 - b0),
            t * _ipow(is1 + eps, 2 - p) * (1.0 - b1),
            t * _ipow(is2 + eps, 2 - p) * (1.0 - b2),
        )
    return D0, D1, D2, 0.0, 0.0, 0.0


@njit(cache=True)
def _in_s(wa, wb, ga, gb):
    dw = wa - wb
    dg = ga - gb
    return dw * dg > 0.0 or (dw == 0.0 and dg == 0.0)


@njit(cache=True)
def _lop_filter3(w0, w1, w2, a0, a1, a2, g0, g1, g2):
    # Algorithm 1 unrolled for r = 3: pairs (0,1), (0,2), (1,2), first
    # violation aborts and reverts every component to the JS alpha.
    if _in_s(w0, w1, g0, g1) and _in_s(w0, w2, g0, g2) and _in_s(w1, w2, g1, g2):
        return g0, g1, g2, False
    return a0, a1, a2, True


@njit(cache=True)
def _weight_state(a, b, c, d, e, scheme, eps, p, lop, eta0, eta1, eta2, tau81):
    is0, is1, is2 = _smoothness(a, b, c, d, e)
    aj0, aj1, aj2 = _js_alpha(is0, is1, is2, eps)
    sj = aj0 + aj1 + aj2
    wj0 = aj0 / sj
    wj1 = aj1 / sj
    wj2 = aj2 / sj
    l10, l11, l12 = D0, D1, D2
    l20, l21, l22 = 0.0, 0.0, 0.0
    fallback = False
    if scheme == 0:
        # identity mapping written in the generalized form: lambda1 = 0, lambda2 = sum(alpha_js)
        l10, l11, l12 = 0.0, 0.0, 0.0
        l20, l21, l22 = sj, sj, sj
        x0, x1, x2 = sj * wj0, sj * wj1, sj * wj2
        o0, o1, o2 = wj0, wj1, wj2
    elif scheme == 1:
        g0, g1, g2 = D0, D1, D2
        x0, x1, x2 = D0, D1, D2
        o0, o1, o2 = D0, D1, D2
    else:
        tau5, phi = _global_indicators(is0, is1, is2)
        l10, l11, l12, l20, l21, l22 = _mapping(
            scheme, is0, is1, is2, sj, tau5, phi, eta0, eta1, eta2, tau81, eps, p
        )
        x0 = l10 + l20 * wj0
        x1 = l11 + l21 * wj1
        x2 = l12 + l22 * wj2
        if lop:
            g0, g1, g2, fallback = _lop_filter3(wj0, wj1, wj2, aj0, aj1, aj2, x0, x1, x2)
        else:
            g0, g1, g2 = x0, x1, x2
        sg = g0 + g1 + g2
        o0 = g0 / sg
        o1 = g1 / sg
        o2 = g2 / sg
    return (
        is0, is1, is2,
        aj0, aj1, aj2,
        wj0, wj1, wj2,
        l10, l11, l12,
        l20, l21, l22,
        x0, x1, x2,
        o0, o1, o2,
        fallback,
    )


@njit(cache=True)
def _weights(a, b, c, d, e, scheme, eps, p, lop):
    eta0 = eta1 = eta2 = tau81 = 0.0
    if scheme == 3:
        eta0, eta1, eta2, tau81 = _eta_tau81(a, b, c, d, e)
    st = _weight_state(a, b, c, d, e, scheme, eps, p, lop, eta0, eta1, eta2, tau81)
    return st[18], st[19], st[20], st[21]


@njit(cache=True)
def weno5(a, b, c, d, e, scheme, eps, p, lop):
    """Left-biased value at x_{j+1/2} from (u_{j-2}, ..., u_{j+2}).

    Returns ``(value, fallback)``; ``fallback`` is True when the LOP filter
    reverted this interface to JS weights.
    """
    w0, w1, w2, fb = _weights(a, b, c, d, e, scheme, eps, p, lop)
    u0, u1, u2 = _substencils(a, b, c, d, e)
    return w0 * u0 + w1 * u1 + w2 * u2, fb


@njit(cache=True)
def _direct_z_alpha(is0, is1, is2, eps, p):
    tau5 = abs(is0 - is2)
    return (
        D0 * (1.0 + _ipow(tau5 / (is0 + eps), p)),
        D1 * (1.0 + _ipow(tau5 / (is1 + eps), p)),
        D2 * (1.0 + _ipow(tau5 / (is2 + eps), p)),
    )


@njit(cache=True)
def _batch_states(windows, scheme, eps, p, lop, out, fallback):
    n = windows.shape[0]
    for i in range(n):
        a, b, c, d, e = windows[i, 0], windows[i, 1], windows[i, 2], windows[i, 3], windows[i, 4]
        eta0 = eta1 = eta2 = tau81 = 0.0
        if scheme == 3:
            eta0, eta1, eta2, tau81 = _eta_tau81(a, b, c, d, e)
        st = _weight_state(a, b, c, d, e, scheme, eps, p, lop, eta0, eta1, eta2, tau81)
        # heterogeneous tuple: index with literals only
        (out[i, 0], out[i, 1], out[i, 2], out[i, 3], out[i, 4], out[i, 5], out[i, 6],
         out[i, 7], out[i, 8], out[i, 9], out[i, 10], out[i, 11], out[i, 12], out[i, 13],
         out[i, 14], out[i, 15], out[i, 16], out[i, 17], out[i, 18], out[i, 19], out[i, 20],
         fallback[i]) = st
        u0, u1, u2 = _substencils(a, b, c, d, e)
        out[i, 21] = st[18] * u0 + st[19] * u1 + st[20] * u2


@njit(cache=True)
def _batch_direct_z(IS, eps, p, out):
    for i in range(IS.shape[0]):
        out[i, 0], out[i, 1], out[i, 2] = _direct_z_alpha(IS[i, 0], IS[i, 1], IS[i, 2], eps, p)


# ---------------------------------------------------------------------------
# auxiliary indicator providers


class EtaTau81Provider:
    """Local indicators eta_k and the global indicator tau81 for ZETA81.

    ``eta_k`` sums the squared first and second undivided derivatives of the
    three-point Lagrange interpolant on substencil ``k`` at the centre cell;
    ``tau81`` is the squared fourth undivided difference of the window, which
    is O(h^8) on smooth data.
    """

    def __call__(self, w):
        a, b, c, d, e = _window(w)
        eta0, eta1, eta2, tau81 = _eta_tau81(a, b, c, d, e)
        return (eta0, eta1, eta2), tau81


DEFAULT_PROVIDER = EtaTau81Provider()


# ---------------------------------------------------------------------------
# public operations


def _window(w):
    w = np.asarray(w, dtype=float)
    if w.shape != (5,):
        raise ValueError(f"stencil window must hold 5 values, got shape {w.shape}")
    if not np.all(np.isfinite(w)):
        raise ValueError("stencil window contains non-finite values")
    return float(w[0]), float(w[1]), float(w[2]), float(w[3]), float(w[4])


def substencil_reconstruct(w):
    """Third-order values at x_{j+1/2} from the three substencils."""
    return _substencils(*_window(w))


def smoothness_indicators(w):
    return _smoothness(*_window(w))


def js_weights(IS, cfg=SchemeConfig()):
    alpha = _js_alpha(float(IS[0]), float(IS[1]), float(IS[2]), cfg.epsilon)
    s = alpha[0] + alpha[1] + alpha[2]
    return alpha, (alpha[0] / s, alpha[1] / s, alpha[2] / s)


def global_indicators(IS, w=None, provider=None, scheme=None):
    tau5, phi = _global_indicators(float(IS[0]), float(IS[1]), float(IS[2]))
    if scheme is not None and Scheme.parse(scheme) == Scheme.ZETA81:
        if provider is None:
            raise MissingProvider("ZETA81 needs an eta/tau81 provider")
        aux, tau_aux = provider(w)
        return SmoothnessState(tuple(IS), tau5, phi, tuple(aux), float(tau_aux))
    return SmoothnessState(tuple(IS), tau5, phi)


def mapping_coefficients(scheme, s, alpha_js, cfg=SchemeConfig()):
    """(lambda1, lambda2) of the generalized mapping for scheme Z, ZETA81 or A."""
    scheme = Scheme.parse(scheme)
    if not scheme.z_type:
        raise ValueError(f"{scheme.name} has no generalized mapping")
    if scheme == Scheme.ZETA81 and (s.aux is None or s.tau_aux is None):
        raise MissingProvider("ZETA81 needs eta_k and tau81")
    eta = s.aux if s.aux is not None else (0.0, 0.0, 0.0)
    tau81 = s.tau_aux if s.tau_aux is not None else 0.0
    lam = _mapping(
        int(scheme), float(s.IS[0]), float(s.IS[1]), float(s.IS[2]),
        float(sum(alpha_js)), s.tau5, s.phi,
        float(eta[0]), float(eta[1]), float(eta[2]), float(tau81),
        cfg.epsilon, cfg.p,
    )
    return lam[:3], lam[3:]


def generalized_alpha(lambda1, lambda2, omega_js):
    return tuple(float(lambda1[k]) + float(lambda2[k]) * float(omega_js[k]) for k in range(3))


def direct_z_alpha(IS, cfg=SchemeConfig()):
    """alpha_k = d_k (1 + (tau5 / (IS_k + eps))^p), evaluated without the mapping form."""
    return _direct_z_alpha(float(IS[0]), float(IS[1]), float(IS[2]), cfg.epsilon, cfg.p)


def lop_idx(a, b, omega_js, alpha_x):
    return (omega_js[a] - omega_js[b]) * (alpha_x[a] - alpha_x[b])


def in_S(a, b, omega_js, alpha_x):
    dw = omega_js[a] - omega_js[b]
    dg = alpha_x[a] - alpha_x[b]
    return bool(dw * dg > 0.0 or (dw == 0.0 and dg == 0.0))


def lop_filter(omega_js, alpha_js, alpha_x):
    """Keep ``alpha_x`` if every substencil pair preserves the JS ordering.

    Works for any number of substencils ``r = len(omega_js)``. Returns
    ``(alpha_out, fallback)``.
    """
    r = len(omega_js)
    for s1 in range(r - 1):
        for s2 in range(s1 + 1, r):
            if not in_S(s1, s2, omega_js, alpha_x):
                return tuple(float(v) for v in alpha_js), True
    return tuple(float(v) for v in alpha_x), False


def reconstruct_interface(w, cfg=SchemeConfig(), provider=DEFAULT_PROVIDER):
    """Left state u^L_{j+1/2} and the full weight state for window ``w``."""
    a, b, c, d, e = _window(w)
    eta = (0.0, 0.0, 0.0)
    tau81 = 0.0
    if cfg.scheme == Scheme.ZETA81:
        if provider is None:
            raise MissingProvider("ZETA81 needs an eta/tau81 provider")
        eta, tau81 = provider((a, b, c, d, e))
    scheme, eps, p, lop = cfg.args()
    st = _weight_state(a, b, c, d, e, scheme, eps, p, lop, eta[0], eta[1], eta[2], tau81)
    u = _substencils(a, b, c, d, e)
    state = WeightState(
        IS=st[0:3], alpha_js=st[3:6], omega_js=st[6:9], lambda1=st[9:12],
        lambda2=st[12:15], alpha_x=st[15:18], omega_final=st[18:21], fallback=bool(st[21]),
    )
    value = st[18] * u[0] + st[19] * u[1] + st[20] * u[2]
    return value, state


def reconstruct_interface_right(w, cfg=SchemeConfig(), provider=DEFAULT_PROVIDER):
    """Right state u^R_{j+1/2}; ``w`` holds (u_{j-1}, ..., u_{j+3})."""
    return reconstruct_interface(np.asarray(w, dtype=float)[::-1], cfg, provider)


def imr_record(state, scheme=None, cell_index=-1, time=0.0):
    return [
        IMRSample(k, float(state.omega_js[k]), float(state.omega_final[k]), cell_index, time)
        for k in range(3)
    ]


@dataclass
class BatchStates:
    IS: np.ndarray
    alpha_js: np.ndarray
    omega_js: np.ndarray
    lambda1: np.ndarray
    lambda2: np.ndarray
    alpha_x: np.ndarray
    omega_final: np.ndarray
    fallback: np.ndarray
    value: np.ndarray


def batch_states(windows, cfg=SchemeConfig()):
    """Weight states for an ``(n, 5)`` array of windows (shipped ZETA81 provider)."""
    windows = np.ascontiguousarray(windows, dtype=float)
    if windows.ndim != 2 or windows.shape[1] != 5:
        raise ValueError("windows must have shape (n, 5)")
    n = windows.shape[0]
    out = np.empty((n, 22))
    fb = np.empty(n, dtype=np.bool_)
    _batch_states(windows, *cfg.args(), out, fb)
    return BatchStates(
        out[:, 0:3], out[:, 3:6], out[:, 6:9], out[:, 9:12], out[:, 12:15],
        out[:, 15:18], out[:, 18:21], fb, out[:, 21],
    )


def batch_direct_z_alpha(IS, cfg=SchemeConfig()):
    IS = np.ascontiguousarray(IS, dtype=float)
    out = np.empty_like(IS)
    _batch_direct_z(IS, cfg.epsilon, cfg.p, out)
    return out


class IMRCollector:
    """Caller-owned, single-writer sink for IMR samples."""

    header = ("time", "cell_index", "k", "omega_js", "omega_x")

    def __init__(self):
        self.samples = []

    def extend(self, samples: Sequence[IMRSample]):
        self.samples.extend(samples)

    def __len__(self):
        return len(self.samples)

    def write_csv(self, path):
        # full precision here: the samples are diagnostics, not table entries
        def write(fh):
            writer = csv.writer(fh)
            writer.writerow(self.header)
            for s in self.samples:
                writer.writerow((repr(s.time), s.cell_index, s.k, repr(s.omega_js), repr(s.omega_x)))

        return _atomic_write(path, write)
