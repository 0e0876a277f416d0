"""Uniform periodic grids on the unit circle.

A grid of ``N`` nodes places ``theta_i = 2*pi*i/N`` with equal quadrature
weight ``2*pi/N``.  The trapezoidal rule on such a grid is spectrally accurate
for smooth periodic integrands, and derivatives are taken in Fourier space.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .errors import GridMismatch, InvalidGrid

MIN_NODES = 16


def _readonly(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Grid:
    """Uniform grid with ``size`` nodes (even, at least 16)."""

    size: int

    def __post_init__(self):
        n = self.size
        if isinstance(n, (bool, np.bool_)) or not isinstance(n, (int, np.integer)):
            raise InvalidGrid(f"grid size must be an integer, got {n!r}")
        if n < MIN_NODES or n % 2:
            raise InvalidGrid(f"grid size must be even and >= {MIN_NODES}, got {n}")
        object.__setattr__(self, "size", int(n))

    @property
    def weight(self) -> float:
        return 2.0 * np.pi / self.size

    @cached_property
    def nodes(self) -> np.ndarray:
        return _readonly(2.0 * np.pi * np.arange(self.size) / self.size)

    @cached_property
    def directions(self) -> np.ndarray:
        """Unit vectors ``(cos theta_i, sin theta_i)`` as an ``(N, 2)`` array."""
        t = self.nodes
        return _readonly(np.column_stack([np.cos(t), np.sin(t)]))

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        return _readonly(np.arange(self.size // 2 + 1, dtype=float))

    def check_values(self, values) -> np.ndarray:
        a = np.asarray(values, dtype=float)
        if a.shape[-1:] != (self.size,):
            raise GridMismatch(f"expected {self.size} samples, got shape {a.shape}")
        return a

    # array level operations, used throughout the package

    def integrate(self, values) -> float:
        return float(np.sum(self.check_values(values), axis=-1) * self.weight)

    def derivative(self, values, order: int = 1) -> np.ndarray:
        """Spectral derivative along the last axis.

        Odd derivatives drop the Nyquist mode so that real data stays real and
        the operator stays antisymmetric.
        """
        a = self.check_values(values)
        if order == 0:
            return a.copy()
        return np.fft.irfft(np.fft.rfft(a, axis=-1) * _multiplier(self.size, order),
                            n=self.size, axis=-1)

    def interpolate(self, values, angles) -> np.ndarray:
        """Evaluate the trigonometric interpolant at arbitrary angles."""
        a = self.check_values(values)
        theta = np.atleast_1d(np.asarray(angles, dtype=float))
        c = np.fft.rfft(a) / self.size
        c[1:-1] *= 2.0
        k = self.wavenumbers
        phase = np.outer(theta, k)
        out = np.cos(phase) @ c.real - np.sin(phase) @ c.imag
        return out if np.ndim(angles) else out[0]

    def matrix(self, order: int) -> np.ndarray:
        """Dense spectral differentiation matrix of the given order."""
        return _diff_matrix(self.size, order)


@lru_cache(maxsize=32)
def _multiplier(n: int, order: int) -> np.ndarray:
    k = np.arange(n // 2 + 1, dtype=float)
    m = (1j * k) ** order
    if order % 2:
        m[-1] = 0.0
    return _readonly(m)


@lru_cache(maxsize=16)
def _diff_matrix(n: int, order: int) -> np.ndarray:
    eye = np.eye(n)
    d = np.fft.irfft(np.fft.rfft(eye, axis=0) * _multiplier(n, order)[:, None], n=n, axis=0)
    return _readonly(d)


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Real samples of a periodic function on a grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.grid.check_values(self.values), dtype=float)
        if v.ndim != 1:
            raise GridMismatch("a scalar field holds one sample per node")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        object.__setattr__(self, "values", _readonly(v))

    def __len__(self):
        return self.grid.size

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


def field(grid: Grid, fn_or_values) -> ScalarField:
    """Sample a callable at the grid nodes, or wrap an existing sample array."""
    if callable(fn_or_values):
        return ScalarField(grid, np.asarray(fn_or_values(grid.nodes), dtype=float)
                           * np.ones(grid.size))
    return ScalarField(grid, fn_or_values)


def integrate(f: ScalarField) -> float:
    return f.grid.integrate(f.values)


def differentiate(f: ScalarField, order: int = 1) -> ScalarField:
    if order not in (1, 2):
        raise ValueError("only first and second derivatives are supported")
    return ScalarField(f.grid, f.grid.derivative(f.values, order))


def resample(f: ScalarField, angles) -> np.ndarray:
    return f.grid.interpolate(f.values, angles)


def same_grid(*fields) -> Grid:
    grids = {x.grid for x in fields}
    if len(grids) != 1:
        raise GridMismatch("fields live on different grids: "
                           + ", ".join(str(g.size) for g in grids))
    return grids.pop()
