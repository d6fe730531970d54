"""Energy components A (kinetic), B (Coulomb), C (power), D (mass) and the
functionals F and Q assembled from them."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .fields import BoxField, RadialField, sine_coefficients
from .hartree import box_potential, radial_potential


@dataclass(frozen=True)
class Couplings:
    """Switches for the Hartree (alpha) and power (beta) terms, and the exponent.

    alpha = beta = 1 is the Schroedinger-Poisson-Slater problem, alpha = 0 the
    pure power NLS, alpha = beta = 0 the free equation.
    """

    alpha: float = 1.0
    beta: float = 1.0
    p: float = 4.0

    def __post_init__(self):
        if self.alpha not in (0, 1) or self.beta not in (0, 1):
            raise ValueError(f"alpha and beta must be 0 or 1, got {self.alpha}, {self.beta}")
        if self.beta and not 10.0 / 3.0 < self.p < 6.0:
            raise ValueError(f"p must lie in (10/3, 6), got {self.p}")
        if not self.beta and not 2.0 < self.p <= 6.0:
            raise ValueError(f"p must lie in (2, 6], got {self.p}")


@dataclass(frozen=True)
class EnergyReport:
    A: float
    B: float
    C: float
    D: float
    F: float
    Q: float
    lambda_hat: float | None
    p: float

    @classmethod
    def from_components(cls, A, B, C, D, p) -> "EnergyReport":
        F = A / 2 + B / 4 + C / p
        Q = A + B / 4 + (3 * (p - 2) / (2 * p)) * C
        lam = (A + B + C) / D if D > 0 else None
        return cls(float(A), float(B), float(C), float(D), float(F), float(Q), lam, float(p))

    @property
    def scale(self) -> float:
        """A + B + |C|, the natural magnitude for relative tolerances."""
        return self.A + self.B + abs(self.C)


def mass(u: RadialField | BoxField) -> float:
    """D(u) = int |u|^2."""
    rho = np.abs(u.values) ** 2
    if isinstance(u, RadialField):
        return float(u.grid.volume_weights @ rho)
    return float(rho.sum() * u.grid.cell_volume)


def kinetic(u: RadialField | BoxField) -> float:
    """A(u) = int |grad u|^2, spectrally (sine series radially, FFT on the box)."""
    if isinstance(u, RadialField):
        a = sine_coefficients(u)
        k = u.grid.wavenumbers
        return float(4.0 * np.pi * u.grid.h * np.sum(k**2 * np.abs(a) ** 2))
    g = u.grid
    uh = sfft.fftn(u.values)
    return float(np.sum(g.k_squared * np.abs(uh) ** 2) * g.cell_volume / g.n**3)


def power_term(u: RadialField | BoxField, p: float) -> float:
    """C(u) = -int |u|^p."""
    if not 2.0 < p <= 6.0:
        raise ValueError(f"power_term needs p in (2, 6], got {p}")
    a = np.abs(u.values) ** p
    if isinstance(u, RadialField):
        return -float(u.grid.volume_weights @ a)
    return -float(a.sum() * u.grid.cell_volume)


def hartree_values(u: RadialField | BoxField) -> np.ndarray:
    rho = np.abs(u.values) ** 2
    if isinstance(u, RadialField):
        return radial_potential(u.grid, rho)
    return box_potential(u.grid, rho)


def energy_report(u: RadialField | BoxField, couplings: Couplings) -> EnergyReport:
    A = kinetic(u)
    D = mass(u)
    B = 0.0
    if couplings.alpha:
        W = hartree_values(u)
        rho = np.abs(u.values) ** 2
        if isinstance(u, RadialField):
            B = float(u.grid.volume_weights @ (W * rho))
        else:
            B = float(np.sum(W * rho) * u.grid.cell_volume)
    C = power_term(u, couplings.p) if couplings.beta else 0.0
    return EnergyReport.from_components(A, B, C, D, couplings.p)


def functional_identity_gap(rep: EnergyReport) -> float:
    """Gap in F - 2Q/(3(p-2)) = (3p-10)/(6(p-2)) A + (3p-8)/(12(p-2)) B,
    relative to A + B + |C| (the right side alone can vanish by cancellation
    on the left, e.g. when A = B = 0)."""
    p = rep.p
    lhs = rep.F - 2.0 / (3.0 * (p - 2)) * rep.Q
    rhs = (3 * p - 10) / (6 * (p - 2)) * rep.A + (3 * p - 8) / (12 * (p - 2)) * rep.B
    return abs(lhs - rhs) / rep.scale if rep.scale > 0 else 0.0
