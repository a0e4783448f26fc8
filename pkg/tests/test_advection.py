import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lopweno import advection
from lopweno.advection import (
    ErrorReport,
    Grid1D,
    error_norms,
    exact_solution,
    increased_errors,
    initialize,
    make_grid,
    rhs,
)
from lopweno.errors import DomainMismatch, ZeroBaseline
from lopweno.kernels import IDEAL_WEIGHTS, IMRCollector, SchemeConfig


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid1D(9)
    g = Grid1D(10)
    assert g.h == pytest.approx(0.2)
    v = g.pad(np.arange(10.0))
    assert list(v[:3]) == [7, 8, 9] and list(v[-3:]) == [0, 1, 2]


# --- initialize ----------------------------------------------------------------


def test_bicwp_plateau_cell():
    g = make_grid("BICWP", 10)
    u = initialize("BICWP", g)
    # the cell [-0.6, -0.4]
    assert u[2] == 0.5


def test_sine_cell_average_closed_form():
    g = make_grid("SINE", 10)
    u = initialize("SINE", g)
    ref = (math.cos(0.0) - math.cos(0.2 * math.pi)) / (0.2 * math.pi)
    assert u[5] == pytest.approx(ref, rel=1e-14)


def test_slp_square_wave_cells():
    g = make_grid("SLP", 100)
    u = initialize("SLP", g)
    c = g.centers
    inside = (c > -0.4) & (c < -0.2)
    assert inside.sum() == 10
    assert np.all(u[inside] == 1.0)


def test_split_cell_is_exact_integral():
    # STEP: a cell straddling x = 0 averages the covered fraction exactly
    g = Grid1D(10, -1.0, 1.0)
    u = exact_solution("STEP", g, 0.05)
    # x <= 0.05 is 1; cell [0, 0.2] is a quarter covered
    assert u[5] == pytest.approx(0.25, abs=1e-15)


def test_domain_mismatch():
    with pytest.raises(DomainMismatch):
        initialize("HCP", Grid1D(20, -1.0, 1.0))


# --- exact_solution --------------------------------------------------------------


def test_exact_t0_bitwise():
    for name in advection.PROBLEMS:
        g = make_grid(name, 40)
        assert np.array_equal(exact_solution(name, g, 0.0), initialize(name, g))


def test_exact_full_period():
    g = make_grid("SLP", 50)
    assert np.array_equal(exact_solution("SLP", g, 2.0), initialize("SLP", g))
    assert np.allclose(exact_solution("SLP", g, 2000.0), initialize("SLP", g), atol=1e-12)


def test_step_translation():
    g = make_grid("STEP", 20)
    u = exact_solution("STEP", g, 0.5)
    c = g.centers
    assert np.all(u[np.abs(c) < 0.45] == 1.0)
    assert np.all(u[np.abs(c) > 0.55] == 0.0)


def test_exact_rejects_negative_time():
    with pytest.raises(ValueError):
        exact_solution("SINE", make_grid("SINE", 20), -1.0)


# --- rhs -------------------------------------------------------------------------


@pytest.mark.parametrize("scheme", ["JS", "ILW", "Z", "ZETA81", "A"])
def test_rhs_constant_zero(scheme):
    g = Grid1D(20)
    assert np.all(rhs(np.full(20, 3.0), g, SchemeConfig(scheme, lop=True)) == 0.0)


def test_rhs_converges_fifth_order():
    errs = []
    Ns = (20, 40, 80, 160)
    for N in Ns:
        g = Grid1D(N)
        e = g.edges
        avg = (np.cos(2 * np.pi * e[:-1]) - np.cos(2 * np.pi * e[1:])) / (2 * np.pi * g.h)
        # exact d/dt of the cell average under u_t = -u_x
        ref = -(np.sin(2 * np.pi * e[1:]) - np.sin(2 * np.pi * e[:-1])) / g.h
        errs.append(np.max(np.abs(rhs(avg, g, SchemeConfig("ILW")) - ref)))
    slopes = [math.log2(errs[i] / errs[i + 1]) for i in range(len(Ns) - 1)]
    assert slopes[-1] == pytest.approx(5.0, abs=0.2)


def test_rhs_step_telescopes():
    g = make_grid("STEP", 40)
    for scheme in ("JS", "Z", "A"):
        r = rhs(initialize("STEP", g), g, SchemeConfig(scheme, lop=True))
        assert abs(r.sum()) * g.h <= 1e-13


# --- error norms -------------------------------------------------------------------


def test_error_norms_examples():
    g = Grid1D(10)
    r = error_norms(np.ones(10), np.ones(10), g)
    assert (r.L1, r.L2, r.Linf) == (0, 0, 0)
    r = error_norms([1.0, -1.0], [0.0, 0.0], 0.5)
    assert (r.L1, r.L2, r.Linf) == (1.0, 1.0, 1.0)


def test_increased_errors():
    base = ErrorReport(0.2, 0.1, 0.5)
    assert increased_errors(base, base) == (0.0, 0.0)
    chi1, chi2 = increased_errors(ErrorReport(0.5, 0.15, 1.0), base)
    assert chi1 == pytest.approx(150.0) and chi2 == pytest.approx(50.0)
    with pytest.raises(ZeroBaseline):
        increased_errors(base, ErrorReport(0.0, 0.0, 0.0))


def test_orders():
    reps = advection.orders([ErrorReport(1.0, 1.0, 2.0), ErrorReport(1 / 32, 1.0, 0.5)])
    assert reps[1].order_L1 == pytest.approx(5.0) and reps[1].order_Linf == pytest.approx(2.0)
    assert reps[0].order_L1 is None


# --- run ------------------------------------------------------------------------------


def test_run_zero_time():
    g = make_grid("SLP", 40)
    u, rep = advection.run("SLP", g, SchemeConfig("Z"), t_final=0.0)
    assert np.array_equal(u, initialize("SLP", g))
    assert rep.steps == 0 and rep.L1 == 0.0


def test_sine_lop_identical_when_no_fallback():
    u1, r1 = advection.run("SINE", 40, SchemeConfig("Z"))
    u2, r2 = advection.run("SINE", 40, SchemeConfig("Z", lop=True))
    assert r2.fallbacks == 0
    assert np.array_equal(u1, u2)


def test_step_imr_cluster_near_ideal():
    col = IMRCollector()
    advection.run("STEP", 100, SchemeConfig("Z"), imr=col)
    assert len(col) == 300
    d = np.array(IDEAL_WEIGHTS)
    k = np.array([s.k for s in col.samples])
    wx = np.array([s.omega_x for s in col.samples])
    wjs = np.array([s.omega_js for s in col.samples])
    assert np.all((wx >= 0) & (wx <= 1))
    # Z-type weights gather around the ideal weights more tightly than JS
    assert np.mean(np.abs(wx - d[k])) < 0.6 * np.mean(np.abs(wjs - d[k]))
    assert np.mean(np.abs(wx - d[k]) < 0.05) > np.mean(np.abs(wjs - d[k]) < 0.05)


@settings(max_examples=20, deadline=None)
@given(
    st.lists(st.floats(-2, 2), min_size=16, max_size=16),
    st.sampled_from([SchemeConfig(s, lop=l) for s in ("JS", "Z", "ZETA81", "A") for l in (False, True)]),
)
def test_prop_conservation(vals, cfg):
    g = Grid1D(16)
    u0 = np.array(vals)
    v = g.pad(u0)
    advection._march(v, g.N, g.h, 0.4, 0.0, 0.5, *cfg.args())
    u = v[3:19]
    assert abs(u.sum() - u0.sum()) * g.h <= 1e-12 * max(1.0, np.abs(u0).sum() * g.h)


def test_csv_outputs(tmp_path):
    g = make_grid("SINE", 20)
    u, rep = advection.run("SINE", g, SchemeConfig("Z"), t_final=0.1)
    advection.write_solution(tmp_path / "solution.csv", g, u, exact_solution("SINE", g, 0.1))
    advection.write_errors(tmp_path / "errors.csv", [20], [rep])
    sol = (tmp_path / "solution.csv").read_text().splitlines()
    err = (tmp_path / "errors.csv").read_text().splitlines()
    assert sol[0] == "x,u_numeric,u_exact" and len(sol) == 21
    assert err[0] == "N,L1,order_L1,Linf,order_Linf"
    assert err[1].startswith("20,") and "E-" in err[1]
