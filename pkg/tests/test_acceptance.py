"""Acceptance suite: criteria 1-9, each printing one PASS/FAIL line.

The long dynamics runs (criteria 7 and 9) take tens of minutes on one core.
"""
import math

import numpy as np
import pytest

from spslab.dynamics import SimConfig, Termination, evolve, virial_consistency
from spslab.energy import Couplings, energy_report, functional_identity_gap
from spslab.fibering import _y, fiber_energy, root_residual, t_star
from spslab.fields import (PROFILE_CLASSES, BoxField, RadialField, gaussian, radial_to_box,
                           random_field, resample_radial)
from spslab.grids import BoxGrid, RadialGrid
from spslab.groundstate import (decay_fit, gamma_curve, nls_peak_energy,
                                pohozaev_check, solve_ground_state)
from spslab.hartree import origin_potential
from spslab.scaling import scale_field


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'}  criterion {n}: {detail}")
        assert ok, detail
    return emit


def _random_reports(count, seed):
    grid = RadialGrid(2048, 16.0)
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        p = float(rng.choice([3.5, 4.0, 5.0]))
        u = random_field(grid, int(rng.integers(2**31)), PROFILE_CLASSES[i % 3])
        out.append(energy_report(u, Couplings(p=p)))
    return out


# -- 1: algebraic identities ----------------------------------------------------------

def test_c1_identity_suite(report):
    reps = _random_reports(1000, seed=1)
    gap = max(functional_identity_gap(r) for r in reps)
    bad = sum(1 for r in reps if r.F < 0 and not r.Q < 0)
    report(1, gap <= 1e-12 and bad == 0,
           f"1000 fields, max relative identity gap {gap:.2e}, F<0 without Q<0: {bad}")


# -- 2: Gaussian oracle ---------------------------------------------------------------

def test_c2_gaussian_oracle(report):
    g = gaussian(RadialGrid(4096, 16.0))
    u = RadialField(g.grid, g.values, 4.0)
    rep = energy_report(u, Couplings())
    W0 = origin_potential(u)
    errs = {"A": rep.A - 1.5, "B": rep.B - math.sqrt(2 / math.pi),
            "C": rep.C + (2 * math.pi) ** -1.5, "D": rep.D - 1.0, "W0": W0 - 2 / math.sqrt(math.pi)}
    worst = max(abs(e) for e in errs.values())
    report(2, worst <= 1e-6, "errors " + ", ".join(f"{k} {abs(v):.1e}" for k, v in errs.items()))


# -- 3: fibering ----------------------------------------------------------------------

def test_c3_fibering_suite(report):
    root = sign_bad = max_bad = 0
    root_worst = fd_worst = 0.0
    probe = np.concatenate([np.geomspace(1e-3, 0.99, 40), np.geomspace(1.01, 1e3, 40)])
    for rep in _random_reports(200, seed=3):
        A, B, C, p = rep.A, rep.B, rep.C, rep.p
        ts = t_star(A, B, C, p)
        rr = root_residual(A, B, C, p, ts)
        root_worst = max(root_worst, rr)
        root += rr > 1e-12
        y = _y(A, B, C, p, ts * probe)
        sign_bad += int(np.any(y[:40] <= 0) or np.any(y[40:] >= 0))
        F_star, _ = fiber_energy(A, B, C, p, ts)
        F_off, _ = fiber_energy(A, B, C, p, ts * np.array([0.25, 0.5, 2.0, 4.0]))
        max_bad += int(np.any(F_off >= F_star))
        for t in ts * np.array([0.3, 0.8, 1.5, 3.0]):
            h = 1e-5 * t
            dF = (fiber_energy(A, B, C, p, t + h)[0] - fiber_energy(A, B, C, p, t - h)[0]) / (2 * h)
            Qt = fiber_energy(A, B, C, p, t)[1] / t
            fd_worst = max(fd_worst, abs(dF - Qt) / abs(Qt))
    ok = root == 0 and sign_bad == 0 and max_bad == 0 and fd_worst <= 1e-6
    report(3, ok, f"200 fields, max root residual {root_worst:.1e}, sign-pattern failures {sign_bad}, "
                  f"non-maximal t* {max_bad}, max dF/dt vs Q/t gap {fd_worst:.1e}")


# -- 4: ground state ------------------------------------------------------------------

def _ground_state_verdict(gs):
    pc = pohozaev_check(gs)
    rep = gs.report
    fit = decay_fit(gs)
    kappa_ref = math.sqrt(-gs.lambda_c) if gs.lambda_c < 0 else float("nan")
    ok = (gs.converged and gs.residual <= 1e-8 and pc.q_residual <= 1e-8 and gs.lambda_c < 0
          and pc.multiplier_residual <= 1e-6 and abs(fit.kappa / kappa_ref - 1) <= 0.10)
    detail = (f"converged={gs.converged} residual {gs.residual:.2e}, |Q|/scale {pc.q_residual:.1e}, "
              f"lambda {gs.lambda_c:.6g}, multiplier relation {pc.multiplier_residual:.1e}, "
              f"kappa {fit.kappa:.4g} vs {kappa_ref:.4g}, F={rep.F:.6g}")
    return ok, detail


def test_c4_ground_state_stated_grid(report):
    gs = solve_ground_state(4.0, 0.5, Couplings(), grid=RadialGrid(4096, 40.0))
    ok, detail = _ground_state_verdict(gs)
    report(4, ok, "n=4096, r_max=40: " + detail)


def test_c4_ground_state_default_grid(report):
    gs = solve_ground_state(4.0, 0.5, Couplings())
    ok, detail = _ground_state_verdict(gs)
    report("4 (default grid n=4096, r_max=5)", ok, detail)


# -- 5: gamma(c) monotonicity ----------------------------------------------------------

def test_c5_gamma_monotone(report):
    curve = gamma_curve(4.0, Couplings(), np.linspace(0.2, 2.0, 10))
    count, worst = curve.monotonicity_violations(1e-6)
    ok_all = bool(curve.converged.all())
    g, A = curve.gamma_values, curve.A
    trend = bool(np.all(np.diff(g) < 0) and np.all(np.diff(A) < 0))
    report(5, ok_all and count == 0 and trend,
           f"10 masses converged={ok_all}, violations {count} (worst {worst:.1e}), "
           f"gamma {g[0]:.5g} -> {g[-1]:.5g}, A {A[0]:.5g} -> {A[-1]:.5g}")


# -- 6: power-NLS baseline --------------------------------------------------------------

def test_c6_nls_baseline(report):
    const = nls_peak_energy(2.0, -4.0, 4.0)          # (A/2)=1, |C|/p=1 isolates the constant
    errs = []
    for rep in _random_reports(50, seed=6):
        A, C = rep.A, rep.C
        ts = t_star(A, 0.0, C, 4.0)
        errs.append(abs(fiber_energy(A, 0.0, C, 4.0, ts)[0] / nls_peak_energy(A, C, 4.0) - 1))
    cp = Couplings(alpha=0)
    curve = gamma_curve(4.0, cp, np.geomspace(0.25, 2.5, 8))
    slope = curve.log_slope()
    ok = (abs(const - 4 / 27) <= 1e-15 and max(errs) <= 1e-12 and bool(curve.converged.all())
          and abs(slope + 1) <= 0.02)
    report(6, ok, f"constant {const:.16f} (4/27={4 / 27:.16f}), max fiber-max gap {max(errs):.1e}, "
                  f"log-log slope {slope:.5f} over c in [0.25, 2.5]")


# -- 7 and 8: conservation and virial on the 64^3 box -------------------------------------

BOX = BoxGrid(64, 24.0)


def _smooth_datum(p=4.0):
    u = radial_to_box(gaussian(RadialGrid(8192, 12.0), width=1.0, mass=3.0), BOX)
    return BoxField(BOX, u.values, p)


@pytest.fixture(scope="module")
def order_runs():
    u = _smooth_datum()
    return {dt: evolve(u, SimConfig(dt, 0.4, Couplings(), cadence=round(0.02 / dt)))
            for dt in (4e-3, 2e-3, 1e-3)}


def _drift(x):
    return float(np.max(np.abs(x - x[0])) / abs(x[0]))


def test_c7_long_run_conservation(report):
    rec = evolve(_smooth_datum(), SimConfig(1e-3, 10.0, Couplings(), cadence=100))
    ok = rec.termination is Termination.COMPLETED and rec.steps == 10_000 and _drift(rec.mass) <= 1e-10
    report(7, ok, f"{rec.steps} steps {rec.termination.value}, mass drift {_drift(rec.mass):.1e}, "
                  f"F drift {_drift(rec.energy):.1e}, max tail {rec.tail_fraction.max():.1e}")


def test_c7_energy_drift_order(order_runs, report):
    dts = np.array(sorted(order_runs))
    drifts = np.array([np.max(np.abs(order_runs[d].energy - order_runs[d].energy[0])) for d in dts])
    order = float(np.polyfit(np.log(dts), np.log(drifts), 1)[0])
    mass = max(_drift(r.mass) for r in order_runs.values())
    ok = abs(order - 2.0) <= 0.1 and mass <= 1e-10
    report(7, ok, "F drift " + ", ".join(f"{e:.2e}@{d:g}" for d, e in zip(dts, drifts))
           + f", measured order {order:.4f}, mass drift {mass:.1e}")


def test_c8_virial_nonlinear(order_runs, report):
    rec = order_runs[1e-3]
    dev = virial_consistency(rec)
    ok = rec.termination is Termination.COMPLETED and dev <= 0.01
    report(8, ok, f"nonlinear run, max |d2V - 8Q| / 8 max(2A + B/2 - Q) = {dev:.2e}, "
                  f"max tail {rec.tail_fraction.max():.1e}")


def test_c8_virial_linear(report):
    rec = evolve(_smooth_datum(), SimConfig(1e-3, 0.4, Couplings(0, 0, 4.0), cadence=20))
    dev = virial_consistency(rec)
    report(8, rec.termination is Termination.COMPLETED and dev <= 1e-10,
           f"linear mode, relative virial deviation {dev:.2e}")


# -- 9: instability dichotomy -----------------------------------------------------------

@pytest.fixture(scope="module")
def gs_fine():
    gs = solve_ground_state(4.0, 0.5, Couplings())
    assert gs.converged
    fine = resample_radial(gs.field, RadialGrid(8192, gs.field.grid.r_max))
    return gs, fine


def test_c9_global_side(gs_fine, report):
    gs, fine = gs_fine
    u = resample_radial(scale_field(fine, 0.9), RadialGrid(1024, 2.0))
    rep = energy_report(u, Couplings())
    rec = evolve(u, SimConfig(2e-5, 20.0, Couplings(), cadence=1000))
    ratio = float(np.max(rec.a_ratio()))
    ok = rec.termination is Termination.COMPLETED and ratio <= 4.0
    report(9, ok, f"lambda=0.9: F={rep.F:.6g} < gamma={gs.gamma_c:.6g}, Q={rep.Q:.4g}; "
                  f"{rec.termination.value} at t={rec.times[-1]:g}, max A ratio {ratio:.4f}, "
                  f"mass drift {_drift(rec.mass):.1e}")


def test_c9_blowup_side(gs_fine, report):
    gs, fine = gs_fine
    u = resample_radial(scale_field(fine, 1.1), RadialGrid(8192, 0.5))
    rep = energy_report(u, Couplings())
    rec = evolve(u, SimConfig(2e-9, 20.0, Couplings(), cadence=50))
    ratio = float(np.max(rec.a_ratio()))
    ok = rec.termination is Termination.BLOWUP_DETECTED and rec.detection_time < 20.0
    report(9, ok, f"lambda=1.1: F={rep.F:.6g} < gamma={gs.gamma_c:.6g}, Q={rep.Q:.4g}; "
                  f"{rec.termination.value} at t={rec.detection_time}, max A ratio {ratio:.4g}, "
                  f"final tail {rec.tail_fraction[-1]:.1e}")
