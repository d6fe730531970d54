import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import A_G, B_G, C_G
from spslab.energy import Couplings, EnergyReport, energy_report, mass
from spslab.fibering import (Classification, NoMaximizerError, classify_initial_datum,
                             classify_report, fiber_energy, fiber_scan, project_to_V,
                             root_residual, t_scale, t_star, _y)
from spslab.fields import PROFILE_CLASSES, RadialField, random_field
from spslab.grids import RadialGrid
from spslab.scaling import scale_field

GRID = RadialGrid(2048, 16.0)

components = st.tuples(
    st.floats(1e-3, 1e3), st.floats(0.0, 1e3), st.floats(1e-3, 1e3), st.floats(3.4, 5.95),
).map(lambda x: (x[0], x[1], -x[2], x[3]))


def test_gaussian_fiber_point():
    F, Q = fiber_energy(A_G, B_G, C_G, 4.0, 1.0)
    assert F == pytest.approx(0.9335977, abs=1e-7)
    assert Q == pytest.approx(A_G + B_G / 4 + 0.75 * C_G, rel=1e-15)


def test_fiber_limits():
    F, Q = fiber_energy(A_G, B_G, C_G, 4.0, 1e-6)
    assert F > 0 and Q > 0
    F, _ = fiber_energy(A_G, B_G, C_G, 4.0, 1e6)
    assert F < -1e15


def test_gaussian_t_star_quadratic_root():
    exact = (A_G + math.sqrt(A_G**2 + 0.75 * abs(C_G) * B_G)) / (1.5 * abs(C_G))
    assert exact == pytest.approx(31.631, abs=1e-3)
    assert t_star(A_G, B_G, C_G, 4.0) == pytest.approx(exact, rel=1e-13)


def test_nls_t_star_linear_root():
    assert t_star(A_G, 0.0, C_G, 4.0) == pytest.approx(4 * A_G / (3 * abs(C_G)), rel=1e-14)
    assert t_scale(A_G, C_G, 4.0) == pytest.approx(4 * A_G / (3 * abs(C_G)), rel=1e-14)


def test_t_star_is_one_on_V():
    A, C, p = 2.0, -1.0, 4.0
    # choose B so that Q(u) = 0: A + B/4 + (3/4) C = 0 needs C < -4A/3
    C = -4.0
    B = -4 * (A + 0.75 * C)
    assert t_star(A, B, C, p) == pytest.approx(1.0, rel=1e-13)


def test_no_maximizer():
    with pytest.raises(NoMaximizerError):
        t_star(1.0, 1.0, 0.0, 4.0)
    with pytest.raises(NoMaximizerError):
        t_star(0.0, 1.0, -1.0, 4.0)


@given(components)
def test_root_and_sign_pattern(comp):
    A, B, C, p = comp
    ts = t_star(A, B, C, p)
    assert root_residual(A, B, C, p, ts) <= 1e-12
    t = ts * np.array([0.25, 0.5, 0.9, 1.1, 2.0, 4.0])
    F, Q = fiber_energy(A, B, C, p, t)
    Fs, _ = fiber_energy(A, B, C, p, ts)
    assert np.all(Q[:3] > 0) and np.all(Q[3:] < 0)
    assert np.all(F < Fs)


@given(st.integers(0, 2**32 - 1), st.sampled_from(PROFILE_CLASSES), st.sampled_from([3.5, 4.0, 5.0]))
def test_unique_sign_change(seed, profile, p):
    u = random_field(GRID, seed, profile)
    rep = energy_report(RadialField(GRID, u.values, p), Couplings(p=p))
    A, B, C = rep.A, rep.B, rep.C
    t = t_scale(A, C, p) * np.logspace(-6, 6, 2001)
    y = _y(A, B, C, p, t)
    y = y[np.abs(y) > 1e-12 * (t * A + B + t ** (1.5 * (p - 2) - 1) * abs(C))]
    assert np.count_nonzero(np.diff(np.sign(y))) == 1


@given(components, st.floats(0.3, 3.0))
def test_derivative_is_Q_over_t(comp, tau):
    A, B, C, p = comp
    t = tau * t_star(A, B, C, p)
    h = 1e-5
    Fp, _ = fiber_energy(A, B, C, p, t * math.exp(h))
    Fm, _ = fiber_energy(A, B, C, p, t * math.exp(-h))
    _, Q = fiber_energy(A, B, C, p, t)
    dF = (Fp - Fm) / (2 * h)        # t dF/dt
    scale = t * t * A + t * B + t ** (1.5 * (p - 2)) * abs(C)
    assert abs(dF - Q) <= 1e-6 * max(abs(Q), 1e-3 * scale)


@given(components)
def test_concave_beyond_t_star(comp):
    A, B, C, p = comp
    ts = t_star(A, B, C, p)
    t = ts * np.linspace(1, 5, 101)
    F, _ = fiber_energy(A, B, C, p, t)
    d2 = F[2:] - 2 * F[1:-1] + F[:-2]
    assert np.all(d2 <= 1e-12 * np.abs(F).max())


def test_scan_shape_and_csv(tmp_path):
    scan = fiber_scan(A_G, B_G, C_G, 4.0, num=101)
    below = scan.t_values < scan.t_star * (1 - 1e-9)
    above = scan.t_values > scan.t_star * (1 + 1e-9)
    assert np.all(scan.Q_values[below] > 0) and np.all(scan.Q_values[above] < 0)
    assert scan.F_values.max() <= fiber_energy(A_G, B_G, C_G, 4.0, scan.t_star)[0]
    assert np.argmax(scan.F_values) == 50
    scan.to_csv(tmp_path / "f.csv")
    lines = (tmp_path / "f.csv").read_text().splitlines()
    assert lines[0] == "t,F,Q" and len(lines) == 102


def test_project_gaussian(gauss):
    v = project_to_V(gauss, Couplings())
    rep = energy_report(v, Couplings())
    assert abs(rep.Q) <= 1e-8 * rep.scale
    assert mass(v) == pytest.approx(1.0, rel=1e-9)
    ts = t_star(A_G, B_G, C_G, 4.0)
    assert rep.F == pytest.approx(fiber_energy(A_G, B_G, C_G, 4.0, ts)[0], rel=1e-6)


def test_project_fixed_point(gauss):
    v = project_to_V(gauss, Couplings())
    w = project_to_V(v, Couplings())
    assert np.max(np.abs(w.values - v.values)) <= 1e-9 * np.max(np.abs(v.values))


@given(st.integers(0, 2**32 - 1), st.sampled_from(PROFILE_CLASSES))
def test_negative_Q_means_contraction_below_one(seed, profile):
    u = random_field(GRID, seed, profile, amplitude=5.0)
    rep = energy_report(RadialField(GRID, u.values, 4.0), Couplings())
    ts = t_star(rep.A, rep.B, rep.C, 4.0)
    assert (rep.Q < 0) == (ts < 1)


def test_classification_of_fiber(gs05):
    u = gs05.field
    assert classify_initial_datum(scale_field(u, 0.9), gs05.gamma_c) is Classification.GLOBAL_CERTIFIED
    assert classify_initial_datum(scale_field(u, 1.1), gs05.gamma_c) is Classification.BLOWUP_CANDIDATE
    assert classify_initial_datum(u, gs05.gamma_c) is Classification.UNCLASSIFIED


def test_classification_margins():
    rep = EnergyReport.from_components(2.0, 0.0, -1.0, 1.0, 4.0)
    assert classify_report(rep, rep.F + 1.0) is Classification.GLOBAL_CERTIFIED
    assert classify_report(rep, rep.F) is Classification.UNCLASSIFIED
    assert classify_report(rep, rep.F + 1e-11) is Classification.UNCLASSIFIED
