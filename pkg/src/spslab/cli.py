"""Command-line front end.

Every subcommand accepts ``--config FILE`` holding ``key = value`` lines
(keys are the long option names, dashes or underscores); options given on
the command line override the file.  Each run writes ``config.txt`` into its
output directory in the same format, so ``--config out/config.txt``
repeats it.  Exit status: 0 success, 1 invalid input, 2 finished without
convergence or with an unexpected outcome.
"""
from __future__ import annotations

import argparse
import contextlib
import csv
import logging
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import SimConfig, Termination, evolve, virial_consistency
from .energy import Couplings, energy_report, functional_identity_gap
from .fibering import (Classification, classify_report, fiber_energy, fiber_scan,
                       root_residual, t_star)
from .fields import (BoxField, RadialField, gaussian, radial_to_box, random_field,
                     read_snapshot, resample_radial)
from .grids import BoxGrid, RadialGrid
from .groundstate import (DEFAULT_N, GroundState, SolverOptions, decay_fit, default_grid,
                          gamma_curve, nls_peak_energy, pohozaev_check, solve_ground_state)
from .scaling import scale_field

log = logging.getLogger("spslab")

EXIT_OK, EXIT_INVALID, EXIT_NONCONVERGED = 0, 1, 2


class InvalidInput(Exception):
    pass


@contextlib.contextmanager
def _validating():
    try:
        yield
    except (ValueError, TypeError) as exc:
        raise InvalidInput(str(exc)) from None


def _f(x) -> str:
    return f"{x:.16e}" if isinstance(x, (float, np.floating)) else str(x)


def _write_rows(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_f(x) for x in row])


def _write_kv(path: Path, pairs) -> None:
    _write_rows(path, ["key", "value"], pairs)


def _float_list(text: str) -> list[float]:
    return [float(x) for x in str(text).replace(",", " ").split()]


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text!r}")


# -- argument handling -----------------------------------------------------------

def _add_physics(sp, p=4.0, c=0.5):
    sp.add_argument("--p", type=float, default=p, help="power exponent, 10/3 < p < 6 (default %(default)s)")
    sp.add_argument("--c", type=float, default=c, help="mass constraint (default %(default)s)")
    sp.add_argument("--alpha", type=int, default=1, choices=(0, 1), help="Hartree coupling (default 1)")
    sp.add_argument("--beta", type=int, default=1, choices=(0, 1), help="power-term coupling (default 1)")


def _add_solver(sp):
    sp.add_argument("--n", type=int, default=DEFAULT_N, help="radial nodes (default %(default)s)")
    sp.add_argument("--r-max", type=float, default=None,
                    help="radial extent; default clip(10 c, 2, 40)")
    sp.add_argument("--tol", type=float, default=1e-8, help="residual tolerance (default %(default)s)")
    sp.add_argument("--max-iter", type=int, default=2000, help="iteration cap (default %(default)s)")
    sp.add_argument("--precond-shift", default="auto",
                    help="preconditioner shift: 'auto' or a positive number (default auto)")


def _add_out(sp, name):
    sp.add_argument("--out", type=Path, default=Path(f"spslab-{name}"),
                    help="output directory (default %(default)s)")
    sp.add_argument("--config", type=Path, default=None, help="file of 'key = value' lines")
    sp.add_argument("-v", "--verbose", action="store_true", help="log progress")


def _add_sim(sp, prefix="", dt=1e-3, t_end=1.0, geometry="box", n=64, L=24.0, r_max=2.0,
             cadence=10):
    d = f"--{prefix}"
    sp.add_argument(f"{d}geometry", choices=("box", "radial"), default=geometry,
                    help="propagation grid (default %(default)s)")
    sp.add_argument(f"{d}grid-n", type=int, default=n,
                    help="box points per axis, or radial nodes (default %(default)s)")
    sp.add_argument(f"{d}box-L", type=float, default=L, help="box side length (default %(default)s)")
    sp.add_argument(f"{d}grid-r-max", type=float, default=r_max,
                    help="radial propagation extent (default %(default)s)")
    sp.add_argument(f"{d}dt", type=float, default=dt, help="time step (default %(default)s)")
    sp.add_argument(f"{d}t-end", type=float, default=t_end, help="final time (default %(default)s)")
    sp.add_argument(f"{d}cadence", type=int, default=cadence,
                    help="steps between diagnostics (default %(default)s)")


def _add_detector(sp):
    sp.add_argument("--a-ratio-max", type=float, default=1e3,
                    help="blow-up threshold on A(t)/A(0) (default %(default)s)")
    sp.add_argument("--spectral-tail-max", type=float, default=1e-6,
                    help="resolution guard on the high-mode power fraction (default %(default)s)")


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    ap = argparse.ArgumentParser(prog="spslab", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    subs = {}

    sp = sub.add_parser("ground-state", help="minimise the energy on the mass sphere")
    _add_physics(sp)
    _add_solver(sp)
    _add_out(sp, "ground-state")
    subs["ground-state"] = sp

    sp = sub.add_parser("gamma-curve", help="sweep gamma(c) over a mass range")
    _add_physics(sp)
    sp.add_argument("--c-min", type=float, default=0.2, help="(default %(default)s)")
    sp.add_argument("--c-max", type=float, default=2.0, help="(default %(default)s)")
    sp.add_argument("--num", type=int, default=10, help="number of masses (default %(default)s)")
    sp.add_argument("--spacing", choices=("linear", "log"), default="linear",
                    help="mass spacing (default %(default)s)")
    sp.add_argument("--c-values", default=None, help="explicit masses, overrides the range")
    sp.add_argument("--parallel", type=_bool, nargs="?", const=True, default=False,
                    help="independent cold-started solves in worker processes")
    sp.add_argument("--mono-tol", type=float, default=1e-6,
                    help="relative tolerance for monotonicity violations (default %(default)s)")
    _add_solver(sp)
    _add_out(sp, "gamma-curve")
    subs["gamma-curve"] = sp

    sp = sub.add_parser("evolve", help="integrate the time-dependent equation")
    _add_physics(sp)
    sp.add_argument("--recipe", default="ground-state-rescaled",
                    choices=("ground-state-rescaled", "gaussian", "plane-wave", "snapshot", "zero"),
                    help="initial datum (default %(default)s)")
    sp.add_argument("--lambda", dest="lam", type=float, default=1.0,
                    help="fiber scaling applied to the ground state (default %(default)s)")
    sp.add_argument("--ground-state", type=Path, default=None,
                    help="ground-state snapshot to reuse instead of solving")
    sp.add_argument("--snapshot", type=Path, default=None, help="initial snapshot for recipe=snapshot")
    sp.add_argument("--width", type=float, default=2.0, help="Gaussian width (default %(default)s)")
    sp.add_argument("--mode", default="1 0 0", help="plane-wave integer mode vector (default '1 0 0')")
    sp.add_argument("--amplitude", type=float, default=0.1, help="plane-wave amplitude (default %(default)s)")
    _add_sim(sp)
    _add_detector(sp)
    sp.add_argument("--snapshot-stride", type=int, default=0,
                    help="write a field snapshot every this many samples (0: never)")
    _add_out(sp, "evolve")
    subs["evolve"] = sp

    sp = sub.add_parser("instability-suite", help="evolve rescaled ground states on both sides of the fiber maximum")
    _add_physics(sp)
    sp.add_argument("--lambdas", default="0.8 0.9 1.0 1.1 1.2", help="scalings (default '%(default)s')")
    sp.add_argument("--ground-state", type=Path, default=None, help="ground-state snapshot to reuse")
    _add_sim(sp, "global-", dt=2e-5, t_end=20.0, geometry="radial", n=1024, r_max=2.0, cadence=1000)
    _add_sim(sp, "blowup-", dt=2e-9, t_end=20.0, geometry="radial", n=8192, r_max=0.5, cadence=50)
    sp.add_argument("--stationary-t-end", type=float, default=0.1,
                    help="final time of the lambda = 1 orbit, run with the global settings")
    _add_detector(sp)
    _add_out(sp, "instability-suite")
    subs["instability-suite"] = sp

    sp = sub.add_parser("decay-fit", help="fit the exponential tail of a ground state")
    _add_physics(sp)
    sp.add_argument("--ground-state", type=Path, default=None, help="ground-state snapshot to fit")
    sp.add_argument("--window", default=None, help="fit window 'r_lo r_hi' (default: automatic)")
    _add_solver(sp)
    _add_out(sp, "decay-fit")
    subs["decay-fit"] = sp

    sp = sub.add_parser("fiber-scan", help="tabulate F and Q along the scaling fiber")
    sp.add_argument("--p", type=float, default=4.0, help="power exponent (default %(default)s)")
    sp.add_argument("--alpha", type=int, default=1, choices=(0, 1), help="Hartree coupling")
    sp.add_argument("--A", type=float, default=None, help="kinetic component")
    sp.add_argument("--B", type=float, default=None, help="Hartree component")
    sp.add_argument("--C", type=float, default=None, help="power component (negative)")
    sp.add_argument("--snapshot", type=Path, default=None, help="read the components from a field")
    sp.add_argument("--num", type=int, default=201, help="scan points (default %(default)s)")
    sp.add_argument("--span", type=float, default=100.0, help="scan t* / span .. t* span (default %(default)s)")
    _add_out(sp, "fiber-scan")
    subs["fiber-scan"] = sp

    sp = sub.add_parser("check", help="run the quick invariant suite")
    sp.add_argument("--samples", type=int, default=100, help="random fields per check (default %(default)s)")
    sp.add_argument("--seed", type=int, default=0, help="(default %(default)s)")
    _add_out(sp, "check")
    subs["check"] = sp
    return ap, subs


def read_config(path) -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise InvalidInput(f"{path}:{lineno}: expected 'key = value'")
        out[key.strip().replace("-", "_")] = val.strip()
    return out


def parse_args(argv=None) -> argparse.Namespace:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap, subs = build_parser()
    args = ap.parse_args(argv)
    if getattr(args, "config", None) is not None:
        sp = subs[args.command]
        known = {a.dest: a for a in sp._actions}
        try:
            cfg = read_config(args.config)
        except OSError as exc:
            raise InvalidInput(f"cannot read config: {exc}") from None
        cfg.pop("command", None)
        defaults = {}
        for key, val in cfg.items():
            if key not in known or key in ("config", "help"):
                raise InvalidInput(f"unknown config key {key!r} for {args.command}")
            act = known[key]
            if isinstance(act, argparse._StoreTrueAction):
                defaults[key] = _bool(val)
            elif val == "None":
                defaults[key] = None
            else:
                try:
                    defaults[key] = act.type(val) if act.type else val
                except (ValueError, argparse.ArgumentTypeError) as exc:
                    raise InvalidInput(f"config key {key!r}: {exc}") from None
                if act.choices is not None and defaults[key] not in act.choices:
                    raise InvalidInput(f"config key {key!r}: {val!r} not in {list(act.choices)}")
        sp.set_defaults(**defaults)
        args = ap.parse_args(argv)
    return args


def echo_config(args, out: Path) -> None:
    lines = [f"# spslab {__version__}", f"command = {args.command}"]
    for k, v in sorted(vars(args).items()):
        if k in ("command", "config", "out"):
            continue
        lines.append(f"{k} = {v}")
    (out / "config.txt").write_text("\n".join(lines) + "\n")


# -- shared helpers -------------------------------------------------------------------

def _couplings(args) -> Couplings:
    with _validating():
        return Couplings(args.alpha, args.beta, args.p)


def _solver_setup(args):
    with _validating():
        if not args.c > 0:
            raise ValueError(f"mass c must be positive, got {args.c}")
        shift = args.precond_shift
        if shift != "auto":
            shift = float(shift)
            if not shift > 0:
                raise ValueError("precond-shift must be positive")
        opts = SolverOptions(tol=args.tol, max_iter=args.max_iter, precond_shift=shift)
        grid = (RadialGrid(args.n, args.r_max) if args.r_max is not None
                else default_grid(args.c, args.n))
    return opts, grid


def _ground_state(args, cp) -> GroundState:
    if getattr(args, "ground_state", None) is not None:
        try:
            gs = GroundState.load(args.ground_state)
        except (OSError, ValueError, KeyError) as exc:
            raise InvalidInput(f"cannot read ground state {args.ground_state}: {exc}") from None
        return gs
    with _validating():
        if not args.c > 0:
            raise ValueError(f"mass c must be positive, got {args.c}")
        if not cp.beta:
            raise ValueError("ground states need beta = 1")
    gs = solve_ground_state(args.p, args.c, cp)
    log.info("ground state: converged=%s lambda=%.10g gamma=%.10g", gs.converged, gs.lambda_c, gs.gamma_c)
    return gs


def _sim_grid(geometry, n, L, r_max):
    with _validating():
        return BoxGrid(n, L) if geometry == "box" else RadialGrid(n, r_max)


def _place(u: RadialField, grid):
    if isinstance(grid, BoxGrid):
        return radial_to_box(u, grid)
    return resample_radial(u, grid)


def _report_pairs(rep):
    return [("A", rep.A), ("B", rep.B), ("C", rep.C), ("D", rep.D), ("F", rep.F), ("Q", rep.Q),
            ("lambda_hat", rep.lambda_hat), ("p", rep.p)]


# -- subcommands ------------------------------------------------------------------------

def cmd_ground_state(args) -> int:
    cp = _couplings(args)
    opts, grid = _solver_setup(args)
    if not cp.beta:
        raise InvalidInput("ground states need beta = 1")
    args.out.mkdir(parents=True, exist_ok=True)
    echo_config(args, args.out)
    gs = solve_ground_state(args.p, args.c, cp, opts=opts, grid=grid)
    gs.save(args.out / "ground_state.txt")
    _write_kv(args.out / "energy_report.csv", _report_pairs(gs.report)
              + [("lambda_c", gs.lambda_c), ("gamma_c", gs.gamma_c), ("residual", gs.residual),
                 ("iterations", gs.iterations), ("converged", gs.converged), ("message", gs.message)])
    pc = pohozaev_check(gs)
    _write_kv(args.out / "pohozaev.csv", [("q_residual", pc.q_residual),
                                          ("multiplier_residual", pc.multiplier_residual),
                                          ("degenerate", pc.degenerate)])
    print(f"converged={gs.converged} ({gs.message}) iterations={gs.iterations}")
    print(f"gamma={gs.gamma_c:.16e} lambda={gs.lambda_c:.16e} residual={gs.residual:.3e}")
    print(f"pohozaev: Q/scale={pc.q_residual:.3e} multiplier={pc.multiplier_residual:.3e}")
    return EXIT_OK if gs.converged else EXIT_NONCONVERGED


def cmd_gamma_curve(args) -> int:
    cp = _couplings(args)
    opts, _ = _solver_setup(args)
    with _validating():
        if args.c_values:
            cs = np.array(_float_list(args.c_values))
        else:
            if not 0 < args.c_min <= args.c_max or args.num < 1:
                raise ValueError("need 0 < c-min <= c-max and num >= 1")
            space = np.geomspace if args.spacing == "log" else np.linspace
            cs = space(args.c_min, args.c_max, args.num) if args.num > 1 else np.array([args.c_min])
        if cs.size == 0 or np.any(cs <= 0) or np.any(np.diff(cs) <= 0):
            raise ValueError("masses must be positive and strictly increasing")
        if not cp.beta:
            raise ValueError("ground states need beta = 1")
    args.out.mkdir(parents=True, exist_ok=True)
    echo_config(args, args.out)
    grid_for = (lambda c: RadialGrid(args.n, args.r_max)) if args.r_max is not None else None
    curve = gamma_curve(args.p, cp, cs, opts, warm_start=not args.parallel, n=args.n,
                        parallel=args.parallel, grid_for=grid_for)
    curve.to_csv(args.out / "gamma_curve.csv")
    count, worst = curve.monotonicity_violations(args.mono_tol)
    ok = curve.converged
    trend_gamma = trend_A = ""
    if ok.sum() >= 2:
        g, A = curve.gamma_values[ok], curve.A[ok]
        trend_gamma = str(bool(g[0] > g[-1]))
        trend_A = str(bool(A[0] > A[-1]))
    slope = curve.log_slope()
    summary = [("monotonicity_violations", count), ("worst_violation", worst),
               ("gamma_increases_toward_small_c", trend_gamma),
               ("A_increases_toward_small_c", trend_A),
               ("log_slope", "" if slope is None else slope),
               ("plateau_estimate", "" if curve.plateau_estimate is None else curve.plateau_estimate),
               ("converged", int(ok.sum())), ("total", int(ok.size))]
    if not cp.alpha and ok.any():
        peaks = [nls_peak_energy(a, -cm, args.p) for a, cm in zip(curve.A[ok], curve.Cmag[ok])]
        gap = max(abs(pk - g) / g for pk, g in zip(peaks, curve.gamma_values[ok]))
        summary.append(("nls_closed_form_gap", gap))
    _write_kv(args.out / "summary.csv", summary)
    for k, v in summary:
        print(f"{k}: {_f(v)}")
    return EXIT_OK if ok.all() else EXIT_NONCONVERGED


def _initial_datum(args, cp, grid):
    """Initial field and, where one is available, the ground-state level for classification."""
    recipe = args.recipe
    if recipe == "snapshot":
        if args.snapshot is None:
            raise InvalidInput("recipe=snapshot needs --snapshot")
        try:
            snap = read_snapshot(args.snapshot)
        except (OSError, ValueError) as exc:
            raise InvalidInput(f"cannot read snapshot {args.snapshot}: {exc}") from None
        u = snap.field
        u = type(u)(u.grid, u.values, args.p)
        gamma = float(snap.meta["gamma_c"]) if "gamma_c" in snap.meta else None
        return u, gamma
    if recipe == "zero":
        z = np.zeros((grid.n,) * 3 if isinstance(grid, BoxGrid) else grid.n)
        return (BoxField(grid, z, args.p) if isinstance(grid, BoxGrid) else RadialField(grid, z, args.p)), None
    if recipe == "plane-wave":
        if not isinstance(grid, BoxGrid):
            raise InvalidInput("plane waves need the box geometry")
        with _validating():
            m = [int(x) for x in args.mode.replace(",", " ").split()]
            if len(m) != 3:
                raise ValueError("--mode needs three integers")
        x = grid.axis
        X, Y, Z = np.meshgrid(x, x, x, indexing="ij")
        k = 2 * np.pi / grid.L * np.array(m)
        return BoxField(grid, args.amplitude * np.exp(1j * (k[0] * X + k[1] * Y + k[2] * Z)), args.p), None
    if recipe == "gaussian":
        with _validating():
            if not args.c > 0 or not args.width > 0:
                raise ValueError("gaussian recipe needs positive --c and --width")
        fine = RadialGrid(8192, max(8 * args.width, 1.0))
        u = gaussian(fine, args.width, args.c)
        u = RadialField(fine, u.values, args.p)
        return _place(u, grid), None
    gs = _ground_state(args, cp)
    with _validating():
        if not args.lam > 0:
            raise ValueError("--lambda must be positive")
    u = scale_field(resample_radial(gs.field, RadialGrid(max(gs.field.grid.n, 8192), gs.field.grid.r_max)),
                    args.lam)
    return _place(u, grid), gs.gamma_c


def _classify(u, cp, gamma):
    if gamma is None or not cp.beta:
        return ""
    return classify_report(energy_report(u, cp), gamma).value


def _run(u, cp, sim, args, out: Path, tag: str):
    with _validating():
        cfg = SimConfig(sim["dt"], sim["t_end"], cp, sim["cadence"], args.a_ratio_max,
                        args.spectral_tail_max, getattr(args, "snapshot_stride", 0) or None)
    snap = None
    if cfg.snapshot_stride:
        from .fields import write_snapshot

        def snap(field, t):
            write_snapshot(out / f"{tag}snapshot_t{t:.6e}.txt", field, {"t": t})
    t0 = time.perf_counter()
    rec = evolve(u, cfg, snap)
    log.info("%s%s in %.1fs", tag, rec.termination.value, time.perf_counter() - t0)
    return rec


def cmd_evolve(args) -> int:
    cp = _couplings(args)
    grid = _sim_grid(args.geometry, args.grid_n, args.box_L, args.grid_r_max)
    with _validating():
        SimConfig(args.dt, args.t_end, cp, args.cadence, args.a_ratio_max, args.spectral_tail_max)
    u, gamma = _initial_datum(args, cp, grid)
    args.out.mkdir(parents=True, exist_ok=True)
    echo_config(args, args.out)
    verdict = _classify(u, cp, gamma)
    sim = {"dt": args.dt, "t_end": args.t_end, "cadence": args.cadence}
    rec = _run(u, cp, sim, args, args.out, "")
    rec.to_csv(args.out / "trajectory.csv")
    mass0 = rec.mass[0]
    drift = float(np.max(np.abs(rec.mass - mass0)) / mass0) if mass0 > 0 else 0.0
    outcome = [("termination", rec.termination.value),
               ("detection_time", "" if rec.detection_time is None else rec.detection_time),
               ("steps", rec.steps), ("classification", verdict),
               ("max_A_ratio", float(np.max(rec.a_ratio()))), ("mass_drift", drift),
               ("gamma_c", "" if gamma is None else gamma)]
    _write_kv(args.out / "outcome.csv", outcome)
    for k, v in outcome:
        print(f"{k}: {_f(v)}")
    return EXIT_OK


def cmd_instability_suite(args) -> int:
    cp = _couplings(args)
    with _validating():
        lams = _float_list(args.lambdas)
        if not lams or any(x <= 0 for x in lams):
            raise ValueError("--lambdas must be positive")
    sides = {}
    for side in ("global", "blowup"):
        a = {k[len(side) + 1:]: v for k, v in vars(args).items() if k.startswith(side + "_")}
        sides[side] = (_sim_grid(a["geometry"], a["grid_n"], a["box_L"], a["grid_r_max"]),
                       {"dt": a["dt"], "t_end": a["t_end"], "cadence": a["cadence"]})
        with _validating():
            SimConfig(a["dt"], a["t_end"], cp, a["cadence"])
    stat_sim = dict(sides["global"][1], t_end=args.stationary_t_end)
    with _validating():
        SimConfig(stat_sim["dt"], stat_sim["t_end"], cp, stat_sim["cadence"])
    gs = _ground_state(args, cp)
    args.out.mkdir(parents=True, exist_ok=True)
    echo_config(args, args.out)
    if not gs.converged:
        print(f"ground state did not converge: {gs.message}")
        return EXIT_NONCONVERGED
    gs.save(args.out / "ground_state.txt")
    fine = resample_radial(gs.field, RadialGrid(max(gs.field.grid.n, 8192), gs.field.grid.r_max))
    rows = []
    status = EXIT_OK
    for lam in lams:
        u_rad = scale_field(fine, lam)
        rep = energy_report(u_rad, cp)
        cls = classify_report(rep, gs.gamma_c)
        side = "global" if lam < 1 else "blowup"
        grid, sim = sides[side]
        if lam == 1:
            sim = stat_sim
        tag = f"lambda{lam:g}_"
        rec = _run(_place(u_rad, grid), cp, sim, args, args.out, tag)
        rec.to_csv(args.out / f"{tag}trajectory.csv")
        sign_ok = (rep.Q > 0) if lam < 1 else (rep.Q < 0) if lam > 1 else True
        below = rep.F < gs.gamma_c if lam != 1 else True
        if not (sign_ok and below):
            status = EXIT_NONCONVERGED
        rows.append((lam, rep.F, rep.Q, cls.value, rec.termination.value,
                     "" if rec.detection_time is None else rec.detection_time,
                     float(np.max(rec.a_ratio())), float(np.max(rec.tail_fraction)), sign_ok, below))
        print(f"lambda={lam:g} F={rep.F:.10g} Q={rep.Q:.6g} {cls.value} -> {rec.termination.value}"
              f" (t={rows[-1][5]}) max A ratio={rows[-1][6]:.4g}")
    _write_rows(args.out / "suite.csv",
                ["lambda", "F", "Q", "classification", "termination", "detection_time",
                 "max_A_ratio", "max_tail_fraction", "Q_sign_ok", "F_below_gamma"], rows)
    return status


def cmd_decay_fit(args) -> int:
    cp = _couplings(args)
    if args.ground_state is None:
        opts, grid = _solver_setup(args)
        if not cp.beta:
            raise InvalidInput("ground states need beta = 1")
        gs = solve_ground_state(args.p, args.c, cp, opts=opts, grid=grid)
    else:
        gs = _ground_state(args, cp)
    with _validating():
        window = tuple(_float_list(args.window)) if args.window else None
        if window is not None and len(window) != 2:
            raise ValueError("--window needs two radii")
    args.out.mkdir(parents=True, exist_ok=True)
    echo_config(args, args.out)
    try:
        fit = decay_fit(gs, window)
    except ValueError as exc:
        print(f"decay fit failed: {exc}")
        return EXIT_NONCONVERGED
    target = math.sqrt(-gs.lambda_c) if gs.lambda_c < 0 else float("nan")
    pairs = [("kappa", fit.kappa), ("sqrt_minus_lambda", target), ("prefactor", fit.prefactor),
             ("r_squared", fit.r_squared), ("r_lo", fit.window[0]), ("r_hi", fit.window[1]),
             ("lambda_c", gs.lambda_c)]
    _write_kv(args.out / "decay_fit.csv", pairs)
    for k, v in pairs:
        print(f"{k}: {_f(v)}")
    return EXIT_OK if gs.converged else EXIT_NONCONVERGED


def cmd_fiber_scan(args) -> int:
    if args.snapshot is not None:
        try:
            u = read_snapshot(args.snapshot).field
        except (OSError, ValueError) as exc:
            raise InvalidInput(f"cannot read snapshot {args.snapshot}: {exc}") from None
        with _validating():
            rep = energy_report(u, Couplings(args.alpha, 1, args.p))
        A, B, C = rep.A, rep.B, rep.C
    else:
        if None in (args.A, args.B, args.C):
            raise InvalidInput("give --A, --B and --C, or --snapshot")
        A, B, C = args.A, args.B, args.C
    with _validating():
        if not (A > 0 and B >= 0 and C < 0 and 2 < args.p < 6):
            raise ValueError("need A > 0, B >= 0, C < 0 and 2 < p < 6")
        if args.num < 2 or not args.span > 1:
            raise ValueError("need num >= 2 and span > 1")
        scan = fiber_scan(A, B, C, args.p, num=args.num, span=args.span)
    args.out.mkdir(parents=True, exist_ok=True)
    echo_config(args, args.out)
    scan.to_csv(args.out / "fiber_scan.csv")
    F_star, Q_star = fiber_energy(A, B, C, args.p, scan.t_star)
    pairs = [("t_star", scan.t_star), ("F_max", F_star), ("Q_at_t_star", Q_star)]
    _write_kv(args.out / "fiber_summary.csv", pairs)
    for k, v in pairs:
        print(f"{k}: {_f(v)}")
    return EXIT_OK


def run_checks(samples: int = 100, seed: int = 0) -> list[tuple[str, bool, str]]:
    """Quick invariant checks; returns (name, passed, detail) triples."""
    results = []
    grid = RadialGrid(2048, 16.0)
    rng = np.random.default_rng(seed)
    profiles = ("gaussian-mixture", "bump", "noisy-decay")

    worst, sign_bad = 0.0, 0
    reports = []
    for i in range(samples):
        p = float(rng.choice([3.5, 4.0, 5.0]))
        u = random_field(grid, int(rng.integers(2**31)), profiles[i % 3])
        rep = energy_report(u, Couplings(p=p))
        reports.append(rep)
        worst = max(worst, functional_identity_gap(rep))
        sign_bad += int(rep.F < 0 and not rep.Q < 0)
    results.append(("functional identity", worst <= 1e-12 and sign_bad == 0,
                    f"max gap {worst:.2e}, F<0 with Q>=0: {sign_bad}"))

    g = gaussian(RadialGrid(4096, 16.0))
    rep = energy_report(RadialField(g.grid, g.values, 4.0), Couplings())
    errs = [abs(rep.A - 1.5), abs(rep.B - math.sqrt(2 / math.pi)),
            abs(rep.C + (2 * math.pi) ** -1.5), abs(rep.D - 1.0)]
    results.append(("gaussian components", max(errs) <= 1e-6, f"max error {max(errs):.2e}"))

    worst = 0.0
    for rep in reports:
        ts = t_star(rep.A, rep.B, rep.C, rep.p)
        worst = max(worst, root_residual(rep.A, rep.B, rep.C, rep.p, ts))
    results.append(("fiber root", worst <= 1e-12, f"max relative Q(t*) {worst:.2e}"))

    bg = BoxGrid(32, 20.0)
    u = radial_to_box(gaussian(RadialGrid(2048, 12.0), 1.0, 1.0), bg)
    rec = evolve(BoxField(bg, u.values, 4.0), SimConfig(1e-2, 0.2, Couplings(), cadence=5,
                                                         spectral_tail_max=1.0))
    drift = float(np.max(np.abs(rec.mass - rec.mass[0])) / rec.mass[0])
    results.append(("mass conservation", drift <= 1e-12, f"relative drift {drift:.2e}"))
    return results


def cmd_check(args) -> int:
    with _validating():
        if args.samples < 1:
            raise ValueError("--samples must be positive")
    args.out.mkdir(parents=True, exist_ok=True)
    echo_config(args, args.out)
    results = run_checks(args.samples, args.seed)
    _write_rows(args.out / "check.csv", ["check", "passed", "detail"], results)
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_NONCONVERGED


COMMANDS = {
    "ground-state": cmd_ground_state,
    "gamma-curve": cmd_gamma_curve,
    "evolve": cmd_evolve,
    "instability-suite": cmd_instability_suite,
    "decay-fit": cmd_decay_fit,
    "fiber-scan": cmd_fiber_scan,
    "check": cmd_check,
}


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
    except InvalidInput as exc:
        print(f"spslab: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_INVALID
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except InvalidInput as exc:
        print(f"spslab {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
