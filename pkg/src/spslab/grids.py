"""Sampling grids: uniform radial grids on (0, r_max] and periodic cubic boxes."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


@dataclass(frozen=True)
class RadialGrid:
    """Uniform radial grid r_j = j*h, j = 1..n, h = r_max/n.

    The last node sits on r_max, where fields obey a Dirichlet condition.
    ``weights`` integrate f(r) r^2 dr over [0, r_max]; the interior weights
    are trapezoidal (the r = 0 endpoint carries zero weight because of the
    r^2 factor) and the last weight is corrected so that r^2 itself is
    integrated exactly.
    """

    n: int
    r_max: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 4:
            raise ValueError(f"radial grid needs n >= 4 samples, got {self.n}")
        if not np.isfinite(self.r_max) or self.r_max <= 0:
            raise ValueError(f"r_max must be positive, got {self.r_max}")

    @property
    def h(self) -> float:
        return self.r_max / self.n

    @cached_property
    def nodes(self) -> np.ndarray:
        r = self.h * np.arange(1, self.n + 1, dtype=float)
        r[-1] = self.r_max
        r.flags.writeable = False
        return r

    @cached_property
    def weights(self) -> np.ndarray:
        h, n = self.h, self.n
        w = h * self.nodes**2
        # exact: sum_{j<n} h (j h)^2 + w_n = r_max^3 / 3
        w[-1] = h**3 * n * (3 * n - 1) / 6.0
        w.flags.writeable = False
        return w

    @cached_property
    def volume_weights(self) -> np.ndarray:
        """4*pi*r^2 quadrature weights for integrals over the ball."""
        w = 4.0 * np.pi * self.weights
        w.flags.writeable = False
        return w

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Sine-series wavenumbers k_m = pi m / r_max, m = 1..n-1."""
        k = np.pi * np.arange(1, self.n, dtype=float) / self.r_max
        k.flags.writeable = False
        return k


@dataclass(frozen=True)
class BoxGrid:
    """Periodic n^3 lattice of side L, centred on the origin."""

    n: int
    L: float

    def __post_init__(self):
        if self.n < 2 or self.n & (self.n - 1):
            raise ValueError(f"n_per_axis must be a power of two, got {self.n}")
        if not np.isfinite(self.L) or self.L <= 0:
            raise ValueError(f"box length must be positive, got {self.L}")

    @property
    def dx(self) -> float:
        return self.L / self.n

    @property
    def cell_volume(self) -> float:
        return self.dx**3

    @cached_property
    def axis(self) -> np.ndarray:
        x = -0.5 * self.L + self.dx * np.arange(self.n)
        x.flags.writeable = False
        return x

    @cached_property
    def k_axis(self) -> np.ndarray:
        k = 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.dx)
        k.flags.writeable = False
        return k

    @cached_property
    def k_squared(self) -> np.ndarray:
        k = self.k_axis
        k2 = k[:, None, None] ** 2 + k[None, :, None] ** 2 + k[None, None, :] ** 2
        k2.flags.writeable = False
        return k2

    @cached_property
    def r_squared(self) -> np.ndarray:
        x = self.axis
        r2 = x[:, None, None] ** 2 + x[None, :, None] ** 2 + x[None, None, :] ** 2
        r2.flags.writeable = False
        return r2

    @property
    def k_max(self) -> float:
        return np.pi / self.dx

    @cached_property
    def high_mode_mask(self) -> np.ndarray:
        """Modes whose largest |k_i| lies in the top third of the band."""
        a = np.abs(self.k_axis) > (2.0 / 3.0) * self.k_max
        m = a[:, None, None] | a[None, :, None] | a[None, None, :]
        m.flags.writeable = False
        return m
