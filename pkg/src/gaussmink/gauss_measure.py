"""Gaussian volume, L_p Gaussian surface area measures and isoperimetric data.

With ``phi(x) = exp(-|x|^2/2) / (2 pi)`` the planar Gaussian volume is

    gamma(K) = (1/2pi) int (1 - exp(-rho(u)^2/2)) du,

and the L_p Gaussian surface area measure has density, with respect to the
normal angle theta,

    s_p(theta) = (1/2pi) h^(1-p) exp(-(h'^2 + h^2)/2) (h'' + h).

The volume integral is evaluated in the normal parametrisation, using
``du/dtheta = h (h'' + h) / rho^2`` along the boundary, which keeps the
quadrature spectrally accurate for smooth bodies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circle_grid import Grid, ScalarField
from .convex_body import Body
from .errors import DomainError, UnsupportedExponent

SQRT_2PI = math.sqrt(2.0 * math.pi)
INVERSE_LIMIT = 8.0


@dataclass(frozen=True, eq=False)
class LpDensity:
    p: float
    grid: Grid
    values: np.ndarray

    @property
    def field(self) -> ScalarField:
        return ScalarField(self.grid, self.values)

    def total(self) -> float:
        return self.grid.integrate(self.values)


@dataclass(frozen=True)
class IsoperimetricReport:
    p: float
    gamma: float
    total: float
    bound: float
    deficit: float
    gaussian_bound: float
    gaussian_deficit: float


def _boundary_jacobian(body: Body) -> tuple[np.ndarray, np.ndarray]:
    """Squared boundary radius and ``du/dtheta`` at the grid normals."""
    r2 = body.h ** 2 + body.dh ** 2
    return r2, body.h * body.curvature_radius / r2


def gaussian_volume(body: Body, method: str = "boundary") -> float:
    """Standard Gaussian measure of the body.

    ``boundary`` integrates in the normal angle (spectral accuracy for smooth
    bodies).  ``radial`` sums the polygon radial function on the grid directions,
    which is exact for the half-plane polygon but only second order for smooth
    bodies.
    """
    if method == "radial":
        rho = body.rho
        return float(body.grid.integrate(-np.expm1(-0.5 * rho ** 2)) / (2 * np.pi))
    if method != "boundary":
        raise ValueError(f"unknown method {method!r}")
    r2, jac = _boundary_jacobian(body)
    return float(body.grid.integrate(-np.expm1(-0.5 * r2) * jac) / (2 * np.pi))


def scaled_volume_function(body: Body):
    """Return ``c -> gamma(c K)``, reusing the boundary data of ``K``."""
    r2, jac = _boundary_jacobian(body)
    w = body.grid.weight * jac / (2 * np.pi)

    def gamma_of(c: float) -> float:
        return float(np.sum(-np.expm1(-0.5 * c * c * r2) * w))

    return gamma_of


def lp_density(body: Body, p: float) -> LpDensity:
    h = body.h
    dens = np.exp(-0.5 * (body.dh ** 2 + h ** 2)) * body.curvature_radius / (2 * np.pi)
    if p != 1:
        dens = dens * h ** (1.0 - p)
    return LpDensity(float(p), body.grid, dens)


def lp_total(body: Body, p: float) -> float:
    return lp_density(body, p).total()


def lp_total_boundary_oracle(body: Body, p: float) -> float:
    """Total L_p Gaussian surface area from boundary positions.

    Works on the boundary curve itself: the Gaussian weight uses ``|x|^2`` of
    the points, ``<x, nu>`` is a dot product with the normal, and arc length
    comes from differentiating the coordinate functions.  No support function
    derivative enters directly, so this is an independent check of
    :func:`lp_total`.
    """
    g = body.grid
    x = body.positions
    speed = np.hypot(g.derivative(x[:, 0]), g.derivative(x[:, 1]))
    r2 = np.einsum("ij,ij->i", x, x)
    support = np.einsum("ij,ij->i", x, g.directions)
    integrand = np.exp(-0.5 * r2) * support ** (1.0 - p) * speed / (2 * np.pi)
    return g.integrate(integrand)


def gaussian_surface_hat(body: Body) -> float:
    """``(1/(n (2pi)^(n/2))) int_{dK} exp(-|x|^2/2) <x, nu> dH`` for ``n = 2``."""
    return 0.5 * lp_total(body, 0.0)


# ------------------------------------------------------ one dimensional profile

def psi(t):
    """Standard normal density."""
    return np.exp(-0.5 * np.square(t)) / SQRT_2PI


def upsilon(x):
    """Standard normal distribution function."""
    if np.ndim(x):
        from scipy.special import ndtr
        return ndtr(np.asarray(x, dtype=float))
    return 0.5 * math.erfc(-float(x) / math.sqrt(2.0))


def upsilon_inverse(a: float, tol: float = 1e-15) -> float:
    """Inverse of :func:`upsilon` by safeguarded Newton with a bisection fallback."""
    a = float(a)
    lo, hi = -INVERSE_LIMIT, INVERSE_LIMIT
    if not (upsilon(lo) <= a <= upsilon(hi)) or not 0.0 < a < 1.0:
        raise DomainError(f"cannot invert the normal distribution at {a!r}")
    x = 0.0
    for _ in range(200):
        fx = upsilon(x) - a
        if fx > 0:
            hi = x
        else:
            lo = x
        d = psi(x)
        step = fx / d if d > 0 else np.inf
        xn = x - step
        if not lo < xn < hi:
            xn = 0.5 * (lo + hi)
        if abs(xn - x) <= tol * max(1.0, abs(x)) or hi - lo <= tol:
            return float(xn)
        x = xn
    return float(x)


def isoperimetric_bound(gamma: float, p: float, n: int = 2) -> float:
    """Lower bound ``n gamma (psi(Upsilon^-1(gamma)) / (n gamma))^p`` for ``S_p``."""
    return n * gamma * (float(psi(upsilon_inverse(gamma))) / (n * gamma)) ** p


def half_volume_bound(p: float, n: int = 2) -> float:
    """Bound on the total ``S_p`` of bodies with Gaussian volume 1/2."""
    return (1.0 / SQRT_2PI) ** p * (n / 2.0) ** (1.0 - p)


def isoperimetric_deficit(body: Body, p: float) -> IsoperimetricReport:
    if not p >= 1:
        raise UnsupportedExponent(f"isoperimetric inequality needs p >= 1, got {p}")
    gam = gaussian_volume(body)
    total = lp_total(body, p)
    bound = isoperimetric_bound(gam, p)
    gbound = float(psi(upsilon_inverse(gam)))
    s1 = total if p == 1 else lp_total(body, 1.0)
    return IsoperimetricReport(float(p), gam, total, bound, total - bound, gbound, s1 - gbound)
