"""Periodic grids and pseudo-spectral operators.

A Grid is an n-dimensional periodic box [-L, L)^n sampled at N points
per axis.  SpectralOps carries the wavenumber bookkeeping (real FFTs on
the last axis), spectral derivatives, the 2/3-rule dealiasing mask and
the discrete norms used throughout: L2 and sup norms, Sobolev norms
formed as sums of derivative L2 norms, and plain trapezoid-free box
quadrature sum(f) * dx^n (exact for band-limited periodic fields).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = ["Grid", "SpectralOps"]


@dataclass(frozen=True)
class Grid:
    """Uniform periodic box [-L, L)^n with N points per axis."""

    n: int
    L: float
    N: int

    def __post_init__(self):
        if self.n not in (1, 2, 3):
            raise ValueError(f"dimension n must be 1, 2 or 3, got {self.n}")
        if self.L <= 0.0:
            raise ValueError(f"half-width L must be positive, got {self.L}")
        if self.N < 16 or (self.N & (self.N - 1)) != 0:
            raise ValueError(f"N must be a power of two >= 16, got {self.N}")

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.N

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.n

    @property
    def cell(self) -> float:
        """Volume of one grid cell, dx^n."""
        return self.dx ** self.n

    def axis(self) -> np.ndarray:
        """1-D coordinate array, x_j = -L + j dx."""
        return -self.L + self.dx * np.arange(self.N)

    def mesh(self) -> np.ndarray:
        """Coordinates with shape (n, N, ..., N)."""
        ax = self.axis()
        return np.stack(np.meshgrid(*([ax] * self.n), indexing="ij"))

    def radius(self) -> np.ndarray:
        """|x| on the mesh."""
        m = self.mesh()
        return np.sqrt(np.sum(m * m, axis=0))


class SpectralOps:
    """Derivatives, dealiasing and norms on one Grid.

    Real-to-complex transforms along the last axis; all operators return
    real fields.  Scalar fields have shape grid.shape, vector fields
    (n, *grid.shape).
    """

    def __init__(self, grid: Grid):
        self.grid = grid
        n, N, dx = grid.n, grid.N, grid.dx
        k1 = 2.0 * np.pi * np.fft.fftfreq(N, d=dx)
        kr = 2.0 * np.pi * np.fft.rfftfreq(N, d=dx)
        axes = [k1] * (n - 1) + [kr]
        mesh = np.meshgrid(*axes, indexing="ij")
        self.k = np.stack(mesh)                    # (n, *rshape)
        self.k2 = np.sum(self.k * self.k, axis=0)  # |k|^2
        self.kmag = np.sqrt(self.k2)
        kmax = np.pi / dx
        cut = 2.0 / 3.0 * kmax
        self.dealias_mask = np.all(np.abs(self.k) <= cut, axis=0)
        self._kmax = kmax

    # -- transforms ----------------------------------------------------

    def fwd(self, f: np.ndarray) -> np.ndarray:
        return np.fft.rfftn(f, axes=tuple(range(-self.grid.n, 0)))

    def inv(self, F: np.ndarray) -> np.ndarray:
        return np.fft.irfftn(F, s=self.grid.shape,
                             axes=tuple(range(-self.grid.n, 0)))

    # -- derivatives ---------------------------------------------------

    def deriv(self, f: np.ndarray, axis: int, order: int = 1) -> np.ndarray:
        """order-th spectral derivative along one axis (physical in/out)."""
        return self.inv((1j * self.k[axis]) ** order * self.fwd(f))

    def grad(self, f: np.ndarray) -> np.ndarray:
        F = self.fwd(f)
        return np.stack([self.inv(1j * self.k[i] * F) for i in range(self.grid.n)])

    def div(self, u: np.ndarray) -> np.ndarray:
        out = np.zeros(self.grid.shape)
        for i in range(self.grid.n):
            out += self.inv(1j * self.k[i] * self.fwd(u[i]))
        return out

    def laplacian(self, f: np.ndarray) -> np.ndarray:
        return self.inv(-self.k2 * self.fwd(f))

    def curl(self, u: np.ndarray) -> np.ndarray:
        """Vorticity: scalar in 2-D, vector in 3-D."""
        n = self.grid.n
        if n == 2:
            return (self.inv(1j * self.k[0] * self.fwd(u[1]))
                    - self.inv(1j * self.k[1] * self.fwd(u[0])))
        if n == 3:
            def d(f, j):
                return self.inv(1j * self.k[j] * self.fwd(f))
            return np.stack([d(u[2], 1) - d(u[1], 2),
                             d(u[0], 2) - d(u[2], 0),
                             d(u[1], 0) - d(u[0], 1)])
        raise ValueError("curl is defined for n = 2 or 3")

    def dealias(self, f: np.ndarray) -> np.ndarray:
        """Project a physical field onto the 2/3 wavenumber band."""
        return self.inv(self.dealias_mask * self.fwd(f))

    # -- norms and quadrature ------------------------------------------

    def quad(self, f: np.ndarray) -> float:
        return float(np.sum(f)) * self.grid.cell

    def l2(self, f: np.ndarray) -> float:
        return float(np.sqrt(np.sum(np.square(f)) * self.grid.cell))

    def linf(self, f: np.ndarray) -> float:
        return float(np.max(np.abs(f)))

    def multi_indices(self, order: int):
        """All derivative multi-indices of the given total order."""
        n = self.grid.n
        return [tuple(c.count(i) for i in range(n))
                for c in itertools.combinations_with_replacement(range(n), order)]

    def deriv_alpha(self, f: np.ndarray, alpha) -> np.ndarray:
        F = self.fwd(f)
        for ax, p in enumerate(alpha):
            if p:
                F = (1j * self.k[ax]) ** p * F
        return self.inv(F)

    def deriv_l2(self, f: np.ndarray, order: int) -> float:
        """Sum of L2 norms of all derivatives of exactly this order."""
        if order == 0:
            return self.l2(f)
        return sum(self.l2(self.deriv_alpha(f, a)) for a in self.multi_indices(order))

    def sobolev(self, f: np.ndarray, order: int) -> float:
        """H^order norm as the sum over derivative orders 0..order."""
        return sum(self.deriv_l2(f, m) for m in range(order + 1))

    def sobolev_fields(self, fields, order: int) -> float:
        """Sobolev norm of a tuple of scalar fields (summed)."""
        return sum(self.sobolev(f, order) for f in fields)

    def tail_fraction(self, f: np.ndarray, cut: float = 2.0 / 3.0) -> float:
        """Spectral energy fraction above cut * kmax on any axis.

        The default band is the one removed by the 2/3 dealias rule.
        Monitors that run on dealiased solutions should pass a smaller
        cut (the default band is then identically zero by construction).
        """
        F = self.fwd(f)
        w = self._rfft_weights()
        tot = float(np.sum(w * np.abs(F) ** 2))
        if tot == 0.0:
            return 0.0
        outside = np.any(np.abs(self.k) > cut * self._kmax, axis=0)
        tail = float(np.sum(w * outside * np.abs(F) ** 2))
        return tail / tot

    def _rfft_weights(self) -> np.ndarray:
        """Multiplicity of each rfft bin in the full spectrum."""
        N = self.grid.N
        w_last = np.full(N // 2 + 1, 2.0)
        w_last[0] = 1.0
        w_last[-1] = 1.0
        shape = (1,) * (self.grid.n - 1) + (N // 2 + 1,)
        return np.broadcast_to(w_last.reshape(shape), self.k2.shape)
