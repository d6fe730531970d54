"""Normalized ground states: minimizers of F on V(c) = {D = c, Q = 0}.

The solver is a Sobolev-preconditioned descent on the mass sphere, with
every iterate pushed back onto Q = 0 along its own fiber; on V(c) the
energy is bounded below even though it is not on the sphere itself.
"""
from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .energy import Couplings, EnergyReport, energy_report, hartree_values, mass
from .fibering import project_to_V
from .fields import RadialField, dst, gaussian, read_snapshot, resample_radial, write_snapshot
from .grids import RadialGrid
from .scaling import SupportOverflowError

log = logging.getLogger(__name__)

DEFAULT_N = 4096


def default_grid(c: float, n: int = DEFAULT_N) -> RadialGrid:
    """Grid sized to the ground state of mass c (width shrinks like c)."""
    return RadialGrid(n, float(np.clip(10.0 * c, 2.0, 40.0)))


# -- residual and multiplier ---------------------------------------------------------

def _neg_laplacian(grid: RadialGrid, u: np.ndarray) -> np.ndarray:
    r = grid.nodes[:-1]
    return dst(grid.wavenumbers**2 * dst(r * u)) / r


def _precondition(grid: RadialGrid, g: np.ndarray, shift: float) -> np.ndarray:
    r = grid.nodes[:-1]
    return dst(dst(r * g) / (grid.wavenumbers**2 + shift)) / r


def _gradient(u: RadialField, couplings: Couplings) -> np.ndarray:
    """L^2 gradient F'(u) on the interior nodes."""
    v = u.values[:-1]
    g = _neg_laplacian(u.grid, v)
    if couplings.alpha:
        g = g + hartree_values(u)[:-1] * v
    if couplings.beta:
        g = g - np.abs(v) ** (couplings.p - 2) * v
    return g


def el_residual(u: RadialField, lam: float, couplings: Couplings) -> tuple[RadialField, float]:
    """Residual of -Lap u - lam u + alpha W_u u - beta |u|^{p-2} u = 0.

    The norm is the mass-weighted L^2 norm of (-Lap + 1)^{-1} applied to the
    residual, an H^{-1}-type measure.
    """
    res = _gradient(u, couplings) - lam * u.values[:-1]
    z = _precondition(u.grid, res, 1.0)
    w = u.grid.volume_weights[:-1]
    norm = math.sqrt(float(w @ np.abs(z) ** 2))
    return u.with_values(np.append(res, 0.0)), norm


def lambda_estimate(u, couplings: Couplings) -> float:
    """(A + alpha B + beta C) / D: the multiplier a solution of mass D carries."""
    rep = energy_report(u, couplings)
    if rep.lambda_hat is None:
        raise ValueError("lambda is undefined for a field of zero mass")
    return rep.lambda_hat


# -- solver -------------------------------------------------------------------------

@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-8
    max_iter: int = 2000
    step: float = 0.5
    max_step: float = 1.0
    min_step: float = 1e-8
    # "auto" preconditions with (-Lap + max(1, -lambda))^{-1}; a number fixes the shift
    precond_shift: float | str = "auto"
    projection_rtol: float = 1e-10


@dataclass
class GroundState:
    p: float
    c: float
    couplings: Couplings
    field: RadialField
    lambda_c: float
    gamma_c: float
    residual: float
    iterations: int
    converged: bool
    message: str = ""
    report: EnergyReport | None = None

    def save(self, path) -> None:
        meta = {
            "c": self.c, "alpha": self.couplings.alpha, "beta": self.couplings.beta,
            "lambda_c": self.lambda_c, "gamma_c": self.gamma_c, "residual": self.residual,
            "iterations": self.iterations, "converged": self.converged,
        }
        write_snapshot(path, self.field, meta)

    @classmethod
    def load(cls, path) -> "GroundState":
        snap = read_snapshot(path)
        m = snap.meta
        u = snap.field
        cp = Couplings(float(m.get("alpha", 1)), float(m.get("beta", 1)), u.p)
        return cls(p=u.p, c=float(m["c"]), couplings=cp, field=u,
                   lambda_c=float(m["lambda_c"]), gamma_c=float(m["gamma_c"]),
                   residual=float(m["residual"]), iterations=int(m["iterations"]),
                   converged=str(m["converged"]) == "True",
                   report=energy_report(u, cp))


class SolverDivergence(FloatingPointError):
    pass


def _normalize(u: RadialField, c: float) -> RadialField:
    return u * math.sqrt(c / mass(u))


def solve_ground_state(p: float, c: float, couplings: Couplings | None = None,
                       init: RadialField | str = "gaussian", opts: SolverOptions | None = None,
                       grid: RadialGrid | None = None) -> GroundState:
    """Minimise F over V(c) on a radial grid.

    Each iteration takes a preconditioned step against F'(u) - lambda u,
    restores the mass and projects back onto Q = 0; the step length is
    backtracked on the projected energy.  Stalling returns converged=False.
    """
    couplings = replace(couplings or Couplings(), p=p)
    opts = opts or SolverOptions()
    if not c > 0:
        raise ValueError(f"mass c must be positive, got {c}")
    if not couplings.beta:
        raise ValueError("ground states need the power term (beta = 1)")
    if isinstance(init, str):
        if init != "gaussian":
            raise ValueError(f"unknown init preset {init!r}")
        grid = grid or default_grid(c)
        u = gaussian(grid, width=grid.r_max / 20.0, mass=c)
    else:
        u = init if grid is None else resample_radial(init, grid)
        u = u.with_values(np.abs(u.values))
    u = RadialField(u.grid, u.values, p)
    grid = u.grid

    def finish(u, rep, res, it, ok, msg):
        vals = np.abs(u.values)
        vals[-1] = 0.0
        u = u.with_values(vals)
        rep = energy_report(u, couplings)
        lam = rep.lambda_hat
        _, res = el_residual(u, lam, couplings)
        return GroundState(p, c, couplings, u, lam, rep.F, res, it, ok, msg, rep)

    try:
        u = project_to_V(_normalize(u, c), couplings, rtol=opts.projection_rtol)
    except SupportOverflowError as exc:
        raise ValueError(f"initial guess does not fit the grid: {exc}") from None
    rep = energy_report(u, couplings)
    tau = opts.step
    res = float("inf")
    for it in range(opts.max_iter + 1):
        lam = rep.lambda_hat
        g = _gradient(u, couplings) - lam * u.values[:-1]
        z1 = _precondition(grid, g, 1.0)
        res = math.sqrt(float(grid.volume_weights[:-1] @ z1**2))
        if not np.isfinite(res) or not np.isfinite(rep.F):
            raise SolverDivergence(f"non-finite state at iteration {it} (lambda={lam}, F={rep.F})")
        log.debug("iter %d  F=%.15g  lambda=%.10g  residual=%.3e  tau=%.3g", it, rep.F, lam, res, tau)
        if res < opts.tol:
            return finish(u, rep, res, it, True, "converged")
        if it == opts.max_iter:
            break
        shift = max(1.0, -lam) if opts.precond_shift == "auto" else float(opts.precond_shift)
        z = z1 if shift == 1.0 else _precondition(grid, g, shift)
        while True:
            trial = u.with_values(np.append(u.values[:-1] - tau * z, 0.0))
            m = mass(trial)
            try:
                if not (np.isfinite(m) and m > 0):
                    raise RuntimeError("degenerate trial mass")
                trial = project_to_V(trial * math.sqrt(c / m), couplings, rtol=opts.projection_rtol)
            except (RuntimeError, ValueError):
                # includes support overflow: the step spread mass past r_max
                trial = None
            if trial is not None:
                trep = energy_report(trial, couplings)
                if trep.F <= rep.F + 1e-13 * rep.scale:
                    break
            tau *= 0.5
            if tau < opts.min_step:
                return finish(u, rep, res, it, False, "step length underflow")
        u, rep = trial, trep
        tau = min(opts.max_step, 1.5 * tau)
    return finish(u, rep, res, opts.max_iter, False, "iteration limit reached")


# -- identities --------------------------------------------------------------------

@dataclass(frozen=True)
class PohozaevCheck:
    q_residual: float
    multiplier_residual: float
    degenerate: bool = False


def pohozaev_check(gs: GroundState) -> PohozaevCheck:
    """Relative residuals of Q = 0 and
    ((p-6)/(3p-6)) A + ((5p-12)/(3p-6)) B/2 = lambda D."""
    rep = gs.report or energy_report(gs.field, gs.couplings)
    p, lam = gs.p, gs.lambda_c
    s1 = rep.A + rep.B + abs(rep.C)
    s2 = rep.A + rep.B + abs(lam) * rep.D
    if s1 == 0 or s2 == 0:
        return PohozaevCheck(0.0, 0.0, True)
    m = (p - 6) / (3 * p - 6) * rep.A + (5 * p - 12) / (3 * p - 6) * rep.B / 2 - lam * rep.D
    return PohozaevCheck(abs(rep.Q) / s1, abs(m) / s2)


def nls_peak_energy(A: float, C: float, p: float, N: int = 3) -> float:
    """max_t of the power-NLS fiber (t^2/2) A + (t^{N(p-2)/2}/p) C in closed form."""
    d = N * (p - 2)
    if d <= 4:
        raise ValueError(f"need N(p-2) > 4, got {d}")
    if not C < 0:
        raise ValueError("need C < 0")
    const = (4.0 / d) ** (4.0 / (d - 4)) * (d - 4) / d
    return const * (A / 2) ** (d / (d - 4)) * (abs(C) / p) ** (-4.0 / (d - 4))


def nls_power_law_exponent(p: float) -> float:
    """d log gamma / d log c for the power NLS in three dimensions."""
    q = 2.0 / (p - 2)
    return (q - 0.5) / (q - 1.5)


@dataclass(frozen=True)
class DecayFit:
    kappa: float
    prefactor: float
    r_squared: float
    window: tuple[float, float]


def decay_window(gs: GroundState, upper: float = 1e-4, lower: float = 1e-10) -> tuple[float, float]:
    u = np.abs(gs.field.values)
    r = gs.field.grid.nodes
    rel = u / u.max()
    i_max = int(np.argmax(u))
    beyond = np.arange(r.size) > i_max
    start = np.flatnonzero(beyond & (rel < upper))
    stop = np.flatnonzero(beyond & (rel < lower))
    if start.size == 0 or stop.size == 0:
        raise ValueError("profile never decays far enough for a tail fit")
    return float(r[start[0]]), float(r[stop[0]])


def decay_fit(gs: GroundState, window: tuple[float, float] | None = None) -> DecayFit:
    """Least-squares fit log(r |u|) = a - kappa r on the window."""
    if window is None:
        window = decay_window(gs)
    r1, r2 = window
    r = gs.field.grid.nodes
    u = np.abs(gs.field.values)
    sel = (r >= r1) & (r <= r2) & (u > 0)
    if sel.sum() < 3:
        raise ValueError(f"decay window [{r1}, {r2}] holds fewer than 3 usable samples")
    x, y = r[sel], np.log(r[sel] * u[sel])
    slope, icpt = np.polyfit(x, y, 1)
    pred = icpt + slope * x
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2_fit = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return DecayFit(-float(slope), float(np.exp(icpt)), r2_fit, (float(r1), float(r2)))


# -- gamma(c) sweep ---------------------------------------------------------------

@dataclass
class GammaCurve:
    p: float
    couplings: Couplings
    c_values: np.ndarray
    gamma_values: np.ndarray
    lambda_values: np.ndarray
    residuals: np.ndarray
    A: np.ndarray
    B: np.ndarray
    Cmag: np.ndarray
    D: np.ndarray
    iterations: np.ndarray
    converged: np.ndarray
    plateau_estimate: float | None = None
    states: list = field(default_factory=list, repr=False)

    COLUMNS = ("c", "gamma", "lambda", "A", "B", "Cmag", "D", "residual", "iterations", "converged")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(self.COLUMNS)
            for i in range(len(self.c_values)):
                row = [self.c_values[i], self.gamma_values[i], self.lambda_values[i], self.A[i],
                       self.B[i], self.Cmag[i], self.D[i], self.residuals[i]]
                w.writerow([f"{x:.16e}" for x in row]
                           + [int(self.iterations[i]), bool(self.converged[i])])

    def monotonicity_violations(self, tol: float = 1e-6) -> tuple[int, float]:
        """Count of increases of gamma with c beyond tol (relative), and the worst one."""
        ok = self.converged.astype(bool)
        g = self.gamma_values[ok]
        if g.size < 2:
            return 0, 0.0
        jumps = np.diff(g) / np.abs(g[:-1])
        bad = jumps > tol
        return int(bad.sum()), float(max(jumps.max(), 0.0))

    def log_slope(self) -> float | None:
        ok = self.converged.astype(bool) & (self.gamma_values > 0)
        if ok.sum() < 2:
            return None
        return float(np.polyfit(np.log(self.c_values[ok]), np.log(self.gamma_values[ok]), 1)[0])


def _solve_one(args):
    p, c, couplings, opts, n = args
    return solve_ground_state(p, c, couplings, "gaussian", opts, grid=default_grid(c, n))


def gamma_curve(p: float, couplings: Couplings | None, c_values, opts: SolverOptions | None = None,
                warm_start: bool = True, n: int = DEFAULT_N, parallel: bool = False,
                grid_for=None) -> GammaCurve:
    """Solve for gamma(c) along increasing c.

    With ``warm_start`` each solve starts from the previous profile scaled by
    sqrt(c_new / c_old); otherwise the solves are independent (and may run
    in worker processes when ``parallel`` is set).
    """
    couplings = replace(couplings or Couplings(), p=p)
    c_values = np.asarray(c_values, dtype=float)
    if c_values.size == 0 or np.any(np.diff(c_values) <= 0) or np.any(c_values <= 0):
        raise ValueError("c_values must be positive and strictly increasing")
    grid_for = grid_for or (lambda c: default_grid(c, n))
    states: list[GroundState | None] = []
    if not warm_start and parallel:
        with ProcessPoolExecutor() as ex:
            states = list(ex.map(_solve_one, [(p, c, couplings, opts, n) for c in c_values]))
    else:
        prev = None
        for c in c_values:
            init = "gaussian"
            if warm_start and prev is not None and prev.converged:
                init = prev.field * math.sqrt(c / prev.c)
            try:
                gs = solve_ground_state(p, c, couplings, init, opts, grid=grid_for(c))
            except (ValueError, FloatingPointError) as exc:
                log.warning("c=%g: %s", c, exc)
                gs = None
            states.append(gs)
            prev = gs if gs is not None else prev
    nan = float("nan")

    def col(fn):
        return np.array([fn(s) if s is not None else nan for s in states], dtype=float)

    conv = np.array([bool(s is not None and s.converged) for s in states])
    curve = GammaCurve(
        p=p, couplings=couplings, c_values=c_values,
        gamma_values=col(lambda s: s.gamma_c), lambda_values=col(lambda s: s.lambda_c),
        residuals=col(lambda s: s.residual), A=col(lambda s: s.report.A),
        B=col(lambda s: s.report.B), Cmag=col(lambda s: abs(s.report.C)),
        D=col(lambda s: s.report.D),
        iterations=np.array([s.iterations if s is not None else -1 for s in states]),
        converged=conv, states=states)
    if conv.any() and not conv.all():
        curve.plateau_estimate = float(curve.gamma_values[np.flatnonzero(conv)[-1]])
    return curve
