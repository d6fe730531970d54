"""Strang-split propagation of i u_t = -Lap u + alpha W_u u - beta |u|^{p-2} u.

Two geometries share one driver: the periodic 3D box (FFT kinetic step,
truncated-kernel Coulomb potential) and radially symmetric fields (sine
transform of r u, Dirichlet wall at r_max).  The kinetic substep is the
exact Fourier multiplier; the potential substep is exact because it leaves
|u| untouched.
"""
from __future__ import annotations

import csv
import enum
import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from .energy import Couplings, EnergyReport
from .fields import BoxField, RadialField, dst
from .hartree import LEAK_TOL, BoundaryLeakWarning, box_potential, leak_fraction, radial_potential

log = logging.getLogger(__name__)


class Termination(str, enum.Enum):
    COMPLETED = "COMPLETED"
    BLOWUP_DETECTED = "BLOWUP_DETECTED"
    UNDER_RESOLVED = "UNDER_RESOLVED"


class BlowupStatus(str, enum.Enum):
    NONE = "NONE"
    BLOWUP_DETECTED = "BLOWUP_DETECTED"
    UNDER_RESOLVED = "UNDER_RESOLVED"


@dataclass(frozen=True)
class SimConfig:
    dt: float
    t_end: float
    couplings: Couplings = field(default_factory=Couplings)
    cadence: int = 10
    a_ratio_max: float = 1e3
    spectral_tail_max: float = 1e-6
    snapshot_stride: int | None = None

    def __post_init__(self):
        if not self.dt > 0 or not self.t_end > 0:
            raise ValueError("dt and t_end must be positive")
        if self.cadence < 1:
            raise ValueError("cadence must be a positive step count")
        if self.n_steps % self.cadence:
            raise ValueError(f"cadence {self.cadence} does not divide the step count {self.n_steps}")

    @property
    def n_steps(self) -> int:
        n = round(self.t_end / self.dt)
        if n < 1 or abs(n * self.dt - self.t_end) > 1e-9 * self.t_end:
            raise ValueError(f"t_end={self.t_end} is not a whole number of steps of dt={self.dt}")
        return n


@dataclass(frozen=True)
class Sample:
    t: float
    mass: float
    A: float
    B: float
    C: float
    virial: float
    tail_fraction: float
    p: float

    @property
    def report(self) -> EnergyReport:
        return EnergyReport.from_components(self.A, self.B, self.C, self.mass, self.p)

    @property
    def F(self) -> float:
        return self.report.F

    @property
    def Q(self) -> float:
        return self.report.Q


@dataclass
class TrajectoryRecord:
    samples: list[Sample] = field(default_factory=list)
    termination: Termination = Termination.COMPLETED
    detection_time: float | None = None
    final: RadialField | BoxField | None = None
    steps: int = 0

    def _col(self, name):
        return np.array([getattr(s, name) for s in self.samples], dtype=float)

    times = property(lambda self: self._col("t"))
    mass = property(lambda self: self._col("mass"))
    energy = property(lambda self: self._col("F"))
    A = property(lambda self: self._col("A"))
    B = property(lambda self: self._col("B"))
    C = property(lambda self: self._col("C"))
    Q = property(lambda self: self._col("Q"))
    virial = property(lambda self: self._col("virial"))
    tail_fraction = property(lambda self: self._col("tail_fraction"))

    COLUMNS = ("t", "mass", "F", "A", "Q", "virial", "tail_fraction")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(self.COLUMNS)
            for s in self.samples:
                w.writerow([f"{getattr(s, c):.16e}" for c in self.COLUMNS])

    def a_ratio(self) -> np.ndarray:
        A = self.A
        return A / A[0] if A.size and A[0] > 0 else np.zeros_like(A)


# -- geometry backends ---------------------------------------------------------

class _BoxOps:
    def __init__(self, u: BoxField, couplings: Couplings):
        self.grid = u.grid
        self.cp = couplings
        self.k2 = self.grid.k_squared
        self._leak_warned = False

    def _leak_check(self, rho, t):
        frac = leak_fraction(self.grid, rho)
        if frac > LEAK_TOL and not self._leak_warned:
            self._leak_warned = True
            warnings.warn(f"t={t:.6g}: {frac:.2e} of the mass lies outside the central half-box; "
                          "the Coulomb potential is no longer exact there", BoundaryLeakWarning,
                          stacklevel=4)

    def initial(self, u):
        return np.array(u.values, dtype=complex)

    def kinetic(self, psi, tau):
        return sfft.ifftn(sfft.fftn(psi) * np.exp(-1j * self.k2 * tau))

    def potential(self, psi):
        rho = np.abs(psi) ** 2
        V = 0.0
        if self.cp.alpha:
            V = box_potential(self.grid, rho, check_leak=False)
        if self.cp.beta:
            V = V - rho ** (0.5 * (self.cp.p - 2))
        return V

    def sample(self, psi, t):
        g = self.grid
        dv = g.cell_volume
        rho = np.abs(psi) ** 2
        ph = sfft.fftn(psi)
        pw = np.abs(ph) ** 2
        total = pw.sum()
        A = float(np.sum(self.k2 * pw) * dv / g.n**3)
        B = 0.0
        if self.cp.alpha:
            self._leak_check(rho, t)
            B = float(np.sum(box_potential(g, rho, check_leak=False) * rho) * dv)
        C = -float(np.sum(rho ** (0.5 * self.cp.p)) * dv) if self.cp.beta else 0.0
        tail = float(pw[g.high_mode_mask].sum() / total) if total > 0 else 0.0
        return Sample(t, float(rho.sum() * dv), A, B, C, float(np.sum(g.r_squared * rho) * dv),
                      tail, self.cp.p)

    def to_field(self, psi, p):
        return BoxField(self.grid, psi, p)


class _RadialOps:
    def __init__(self, u: RadialField, couplings: Couplings):
        self.grid = u.grid
        self.cp = couplings
        self.r = self.grid.nodes[:-1]
        self.k2 = self.grid.wavenumbers ** 2
        self.w = self.grid.volume_weights[:-1]
        m = self.k2.size
        self.high = np.arange(1, m + 1) > (2 * m) // 3

    def initial(self, u):
        return np.array(u.values[:-1], dtype=complex)

    def kinetic(self, psi, tau):
        return dst(dst(self.r * psi) * np.exp(-1j * self.k2 * tau)) / self.r

    def _hartree(self, rho):
        return radial_potential(self.grid, np.append(rho, 0.0))[:-1]

    def potential(self, psi):
        rho = np.abs(psi) ** 2
        V = 0.0
        if self.cp.alpha:
            V = self._hartree(rho)
        if self.cp.beta:
            V = V - rho ** (0.5 * (self.cp.p - 2))
        return V

    def sample(self, psi, t):
        rho = np.abs(psi) ** 2
        a = dst(self.r * psi)
        pw = np.abs(a) ** 2
        total = pw.sum()
        A = float(4.0 * np.pi * self.grid.h * np.sum(self.k2 * pw))
        B = float(self.w @ (self._hartree(rho) * rho)) if self.cp.alpha else 0.0
        C = -float(self.w @ rho ** (0.5 * self.cp.p)) if self.cp.beta else 0.0
        tail = float(pw[self.high].sum() / total) if total > 0 else 0.0
        return Sample(t, float(self.w @ rho), A, B, C, float(self.w @ (self.r**2 * rho)), tail,
                      self.cp.p)

    def to_field(self, psi, p):
        return RadialField(self.grid, np.append(psi, 0.0), p)


def _ops(u, couplings):
    if isinstance(u, BoxField):
        return _BoxOps(u, couplings)
    if isinstance(u, RadialField):
        return _RadialOps(u, couplings)
    raise TypeError(f"cannot propagate {type(u).__name__}")


def _check_finite(psi, t):
    if not np.all(np.isfinite(psi)):
        raise FloatingPointError(f"non-finite field values at t={t:.6g}")


# -- public operations -----------------------------------------------------------

def strang_step(u: RadialField | BoxField, dt: float, couplings: Couplings):
    """One kinetic(dt/2) - potential(dt) - kinetic(dt/2) step."""
    ops = _ops(u, couplings)
    psi = ops.kinetic(ops.initial(u), 0.5 * dt)
    psi = psi * np.exp(-1j * ops.potential(psi) * dt)
    psi = ops.kinetic(psi, 0.5 * dt)
    _check_finite(psi, dt)
    return ops.to_field(psi, u.p)


def detect_blowup(sample: Sample, cfg: SimConfig, a_initial: float) -> BlowupStatus:
    """Threshold test on A(t)/A(0), guarded by the spectral tail fraction.

    Growth only counts as blow-up while the top third of the spectrum holds
    less than ``spectral_tail_max`` of the power; otherwise the grid has
    stopped resolving the solution.
    """
    if sample.tail_fraction > cfg.spectral_tail_max:
        return BlowupStatus.UNDER_RESOLVED
    if a_initial > 0 and sample.A / a_initial > cfg.a_ratio_max:
        return BlowupStatus.BLOWUP_DETECTED
    return BlowupStatus.NONE


def evolve(u0: RadialField | BoxField, cfg: SimConfig, snapshot=None) -> TrajectoryRecord:
    """Integrate to cfg.t_end or until the blow-up detector fires.

    Consecutive half kinetic steps are fused between diagnostic samples.
    ``snapshot(field, t)`` is called every ``cfg.snapshot_stride`` samples.
    """
    ops = _ops(u0, cfg.couplings)
    dt = cfg.dt
    psi = ops.initial(u0)
    rec = TrajectoryRecord()
    s0 = ops.sample(psi, 0.0)
    rec.samples.append(s0)
    a0 = s0.A
    status = detect_blowup(s0, cfg, a0)
    n_blocks = cfg.n_steps // cfg.cadence
    step = 0
    for b in range(n_blocks):
        if status is not BlowupStatus.NONE:
            break
        psi = ops.kinetic(psi, 0.5 * dt)
        for j in range(cfg.cadence):
            psi = psi * np.exp(-1j * ops.potential(psi) * dt)
            psi = ops.kinetic(psi, dt if j < cfg.cadence - 1 else 0.5 * dt)
        step += cfg.cadence
        t = step * dt
        _check_finite(psi, t)
        s = ops.sample(psi, t)
        rec.samples.append(s)
        status = detect_blowup(s, cfg, a0)
        if snapshot is not None and cfg.snapshot_stride and (b + 1) % cfg.snapshot_stride == 0:
            snapshot(ops.to_field(psi, u0.p), t)
    rec.steps = step
    if status is BlowupStatus.BLOWUP_DETECTED:
        rec.termination = Termination.BLOWUP_DETECTED
        rec.detection_time = rec.samples[-1].t
    elif status is BlowupStatus.UNDER_RESOLVED:
        rec.termination = Termination.UNDER_RESOLVED
        rec.detection_time = rec.samples[-1].t
    rec.final = ops.to_field(psi, u0.p)
    log.info("evolve: %s after %d steps (t=%.6g)", rec.termination.value, step, step * dt)
    return rec


def virial_consistency(traj: TrajectoryRecord) -> float:
    """Max deviation between the second difference of V(t) = int |x|^2 |u|^2
    and 8 Q(t) at interior samples, relative to 8 max(2A + B/2 - Q), the
    size of the terms that make up Q."""
    t = traj.times
    if t.size < 3:
        raise ValueError("virial check needs at least 3 samples")
    h = np.diff(t)
    if not np.allclose(h, h[0], rtol=1e-9, atol=0.0):
        raise ValueError("virial check needs uniformly spaced samples")
    V = traj.virial
    d2 = (V[2:] - 2 * V[1:-1] + V[:-2]) / h[0] ** 2
    Q = traj.Q
    target = 8.0 * Q[1:-1]
    scale = 8.0 * np.max(2 * traj.A + traj.B / 2 - Q)
    if scale <= 0:
        return 0.0
    return float(np.max(np.abs(d2 - target)) / scale)
