"""The fiber t -> F(u^t) in component space, projection onto V(c) and the
classification of initial data for the dynamics."""
from __future__ import annotations

import csv
import enum
from dataclasses import dataclass

import numpy as np

from .energy import Couplings, EnergyReport, energy_report
from .fields import BoxField, RadialField
from .scaling import scale_field

EPS_CLASSIFY = 1e-10


class NoMaximizerError(ValueError):
    """The fiber has no interior maximum (C >= 0 or A <= 0)."""


def fiber_energy(A: float, B: float, C: float, p: float, t: float) -> tuple[float, float]:
    """(F(u^t), Q(u^t)) from the components of u."""
    s = 1.5 * (p - 2)
    ts = t**s
    F = 0.5 * t * t * A + 0.25 * t * B + ts * C / p
    Q = t * t * A + 0.25 * t * B + (s / p) * ts * C
    return F, Q


def _y(A, B, C, p, t):
    s = 1.5 * (p - 2)
    kappa = s / p
    return t * A + 0.25 * B + kappa * t ** (s - 1) * C


def root_residual(A: float, B: float, C: float, p: float, t: float) -> float:
    """|Q(u^t)| relative to A + B + |C| of u^t."""
    s = 1.5 * (p - 2)
    _, Q = fiber_energy(A, B, C, p, t)
    return abs(Q) / (t * t * A + t * B + t**s * abs(C))


def t_scale(A: float, C: float, p: float) -> float:
    """Balance point of the kinetic and power terms (the root when B = 0)."""
    return (2 * p * A / (3 * (p - 2) * abs(C))) ** (2.0 / (3 * p - 10))


def t_star(A: float, B: float, C: float, p: float, max_iter: int = 200) -> float:
    """Unique maximiser of t -> F(u^t), the root of y(t) = Q(u^t)/t.

    y(t) = tA + B/4 + (3(p-2)/(2p)) t^{3(p-2)/2 - 1} C is concave for
    p > 10/3, positive at t_scale and eventually negative, so Newton from the
    right of the root is monotone; bisection guards the rare overshoot.
    """
    if not C < 0:
        raise NoMaximizerError(f"fiber needs C < 0 for a finite maximiser, got C={C}")
    if not A > 0:
        raise NoMaximizerError(f"fiber needs A > 0, got A={A}")
    s = 1.5 * (p - 2)
    kappa = s / p
    lo = t_scale(A, C, p)
    if B == 0:
        return lo
    hi = 2.0 * lo
    while _y(A, B, C, p, hi) > 0:
        lo, hi = hi, 2.0 * hi
    t = hi
    for _ in range(max_iter):
        y = _y(A, B, C, p, t)
        if abs(y) <= 1e-14 * (t * A + 0.25 * B + kappa * t ** (s - 1) * abs(C)):
            return t
        if y > 0:
            lo = t
        else:
            hi = t
        dy = A + kappa * (s - 1) * t ** (s - 2) * C
        t_new = t - y / dy if dy < 0 else 0.5 * (lo + hi)
        if not lo < t_new < hi:
            t_new = 0.5 * (lo + hi)
        if t_new == t:
            return t
        t = t_new
    return t


@dataclass(frozen=True)
class FiberScan:
    t_values: np.ndarray
    F_values: np.ndarray
    Q_values: np.ndarray
    t_star: float
    A: float
    B: float
    C: float
    p: float

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "F", "Q"])
            for row in zip(self.t_values, self.F_values, self.Q_values):
                w.writerow([f"{x:.16e}" for x in row])


def fiber_scan(A, B, C, p, t_values=None, num: int = 201, span: float = 100.0) -> FiberScan:
    """Sample the fiber on ``t_values`` (default: log-spaced around t*)."""
    ts = t_star(A, B, C, p)
    if t_values is None:
        t_values = ts * np.logspace(-np.log10(span), np.log10(span), num)
    t_values = np.asarray(t_values, dtype=float)
    F, Q = fiber_energy(A, B, C, p, t_values)
    return FiberScan(t_values, F, Q, ts, A, B, C, p)


def project_to_V(u: RadialField | BoxField, couplings: Couplings,
                 rtol: float = 1e-9, max_rounds: int = 30):
    """Rescale u onto Q = 0 along its own fiber.

    Each round computes t* from the components and resamples; rounds repeat
    until the resampled field meets |Q| <= rtol * (A + B + |C|).
    """
    rep = energy_report(u, couplings)
    for _ in range(max_rounds):
        if abs(rep.Q) <= rtol * rep.scale:
            return u
        t = t_star(rep.A, rep.B, rep.C, couplings.p)
        u = scale_field(u, t)
        rep = energy_report(u, couplings)
    if abs(rep.Q) <= 10 * rtol * rep.scale:
        return u
    raise RuntimeError(f"projection onto Q=0 did not settle: Q/scale={rep.Q / rep.scale:.2e}")


class Classification(str, enum.Enum):
    GLOBAL_CERTIFIED = "GLOBAL_CERTIFIED"
    BLOWUP_CANDIDATE = "BLOWUP_CANDIDATE"
    UNCLASSIFIED = "UNCLASSIFIED"


def classify_report(rep: EnergyReport, gamma_c: float, eps: float = EPS_CLASSIFY) -> Classification:
    if rep.F < gamma_c - eps:
        if rep.Q > eps:
            return Classification.GLOBAL_CERTIFIED
        if rep.Q < -eps:
            return Classification.BLOWUP_CANDIDATE
    return Classification.UNCLASSIFIED


def classify_initial_datum(u, gamma_c: float, couplings: Couplings | None = None,
                           eps: float = EPS_CLASSIFY) -> Classification:
    """Q > 0 and F < gamma(c) certifies global existence; Q < 0 with
    F < gamma(c) places u in the instability set.  Anything within ``eps``
    of either boundary is left unclassified."""
    return classify_report(energy_report(u, couplings or Couplings()), gamma_c, eps)
