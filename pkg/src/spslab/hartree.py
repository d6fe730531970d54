"""Coulomb (Hartree) potential W = |x|^{-1} * |u|^2 and energy B = int W |u|^2.

The physics literature often writes phi_u = W / (4 pi); everything here uses
the bare convolution W.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft as sfft
from scipy.integrate import cumulative_simpson, simpson

from .fields import BoxField, RadialField, dst
from .grids import BoxGrid, RadialGrid


LEAK_TOL = 1e-8


class BoundaryLeakWarning(UserWarning):
    """Density reaches the outer half of the box; free-space convolution degrades."""


@dataclass(frozen=True, eq=False)
class HartreePotential:
    grid: RadialGrid | BoxGrid
    values: np.ndarray


def radial_potential(grid: RadialGrid, rho: np.ndarray, method: str = "spectral") -> np.ndarray:
    """W(r) for a radial density sampled on ``grid``.

    ``spectral`` solves -(1/r)(rW)'' = 4 pi rho with the same sine basis as
    the kinetic operator and the far-field condition r W(r_max) = D.  The
    resulting bilinear form is symmetric, so 4 W u is exactly the discrete
    gradient of B.  ``newton`` evaluates Newton's shell formula
        W(r) = 4 pi [ (1/r) int_0^r rho s^2 ds + int_r^R rho s ds ]
    with two cumulative Simpson sums.
    """
    r = grid.nodes
    total = float(grid.volume_weights @ rho)
    if method == "spectral":
        k = grid.wavenumbers
        psi = 4.0 * np.pi * dst(dst(r[:-1] * rho[:-1]) / k**2)
        W = np.empty_like(r)
        W[:-1] = psi / r[:-1] + total / grid.r_max
        W[-1] = total / grid.r_max
        return W
    if method == "newton":
        s = np.concatenate([[0.0], r])
        rho0 = np.concatenate([[rho[0]], rho])
        inner = cumulative_simpson(rho0 * s**2, x=s, initial=0.0)[1:]
        outer_c = cumulative_simpson(rho0 * s, x=s, initial=0.0)[1:]
        outer = outer_c[-1] - outer_c
        return 4.0 * np.pi * (inner / r + outer)
    raise ValueError(f"unknown method {method!r}")


def radial_hartree(u: RadialField, method: str = "spectral") -> HartreePotential:
    """Hartree potential of a radial field (see radial_potential)."""
    rho = np.abs(u.values) ** 2
    return HartreePotential(u.grid, radial_potential(u.grid, rho, method))


def origin_potential(u: RadialField) -> float:
    """W(0+) = 4 pi int_0^R |u|^2 s ds, the r -> 0 limit of the shell formula
    (the grid itself starts at r = h)."""
    s = np.concatenate([[0.0], u.grid.nodes])
    f = np.concatenate([[0.0], np.abs(u.values) ** 2 * u.grid.nodes])
    return float(4.0 * np.pi * simpson(f, x=s))


# -- periodic box: truncated kernel on a zero-padded lattice ----------------

@lru_cache(maxsize=4)
def _box_kernel_hat(n: int, L: float) -> np.ndarray:
    """rFFT of the truncated Coulomb kernel on the (2n)^3 padded lattice.

    K_T(x) = 1/|x| for |x| <= T = L sqrt(3), whose transform is
    4 pi (1 - cos(T|k|)) / |k|^2 with value 2 pi T^2 at k = 0.  The spectrum
    is sampled on a fourfold oversampled lattice and brought back to real
    space with a DCT-I (the kernel is even in each axis); the real-space
    kernel restricted to separations in [-L, L]^3 is then exact for the
    aperiodic convolution on the twofold padded lattice.
    """
    h = L / n
    T = L * np.sqrt(3.0)
    m = np.arange(2 * n + 1)
    k1 = 2.0 * np.pi * m / (4 * n * h)
    k2 = k1[:, None, None] ** 2 + k1[None, :, None] ** 2 + k1[None, None, :] ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        Khat = 4.0 * np.pi * (1.0 - np.cos(T * np.sqrt(k2))) / k2
    Khat[0, 0, 0] = 2.0 * np.pi * T**2
    G = sfft.dctn(Khat, type=1) / (4 * n * h) ** 3
    del Khat, k2
    idx = np.minimum(np.arange(2 * n), 2 * n - np.arange(2 * n))
    G_pad = G[np.ix_(idx, idx, idx)]
    del G
    Ghat = sfft.rfftn(G_pad).real
    Ghat.flags.writeable = False
    return Ghat


def box_potential(grid: BoxGrid, rho: np.ndarray, check_leak: bool = True) -> np.ndarray:
    """Free-space W on the box lattice from a real density ``rho``."""
    n = grid.n
    if check_leak:
        _check_leak(grid, rho)
    Ghat = _box_kernel_hat(n, float(grid.L))
    # pruned transforms: only the first octant of the padded array is nonzero
    a = sfft.rfft(rho, n=2 * n, axis=2)
    a = sfft.fft(a, n=2 * n, axis=1)
    a = sfft.fft(a, n=2 * n, axis=0)
    a *= Ghat
    a = sfft.ifft(a, axis=0)[:n]
    a = sfft.ifft(a, axis=1)[:, :n]
    W = sfft.irfft(a, n=2 * n, axis=2)[:, :, :n]
    return W * grid.cell_volume


def leak_fraction(grid: BoxGrid, rho: np.ndarray) -> float:
    """Fraction of the density outside the central half-box, where the
    truncated kernel is no longer exact."""
    total = rho.sum()
    if total <= 0:
        return 0.0
    x = np.abs(grid.axis) > 0.25 * grid.L
    outer = x[:, None, None] | x[None, :, None] | x[None, None, :]
    return float(rho[outer].sum() / total)


def _check_leak(grid: BoxGrid, rho: np.ndarray) -> None:
    frac = leak_fraction(grid, rho)
    if frac > LEAK_TOL:
        warnings.warn(f"{frac:.2e} of the mass lies outside the central half-box",
                      BoundaryLeakWarning, stacklevel=3)


def box_hartree(u: BoxField) -> HartreePotential:
    rho = np.abs(u.values) ** 2
    return HartreePotential(u.grid, box_potential(u.grid, rho))


def hartree_energy(u: RadialField | BoxField, W: HartreePotential | None = None) -> float:
    """B(u) = int W_u |u|^2."""
    if W is None:
        W = radial_hartree(u) if isinstance(u, RadialField) else box_hartree(u)
    rho = np.abs(u.values) ** 2
    if isinstance(u, RadialField):
        return float(u.grid.volume_weights @ (W.values * rho))
    return float(np.sum(W.values * rho) * u.grid.cell_volume)
