"""Even L_p Gaussian Minkowski problem for p <= 0 by constrained maximisation.

For p < 0 the functional ``J(h) = -(1/p) int h^p f`` and for p = 0 the
functional ``E(h) = -int f log h`` are maximised over origin-symmetric convex
bodies with Gaussian volume 1/2.  At a maximiser the Lagrange condition reads

    lambda * s_p(h) = f,    lambda = mu(S^1) / S_p(K)(S^1),

so the maximiser solves the Minkowski problem up to that constant.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .circle_grid import Grid, ScalarField, _readonly
from .convex_body import Body, ball, scale_body, symmetrize, wulff_shape
from .errors import (GridMismatch, InvalidMeasure, MeasureConcentrated, MeasureNotEven,
                     NonPositiveSupport, NoProgress, UnsupportedExponent)
from .gauss_measure import gaussian_volume, lp_density, scaled_volume_function

log = logging.getLogger(__name__)

EVEN_TOL = 1e-12
SPREAD_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class MeasureDensity:
    """Finite Borel measure on the circle with density ``f`` in the angle.

    With ``even=True`` the density is averaged with its antipodal reflection,
    after checking it is already even up to round-off.
    """

    grid: Grid
    density: np.ndarray
    even: bool = False

    def __post_init__(self):
        f = np.array(self.grid.check_values(self.density), dtype=float)
        if f.ndim != 1 or not np.all(np.isfinite(f)):
            raise InvalidMeasure("density must be a finite sample vector")
        if np.any(f < 0):
            raise InvalidMeasure("density must be non-negative")
        if not f.sum() > 0:
            raise InvalidMeasure("measure has zero mass")
        if self.even:
            g = np.roll(f, self.grid.size // 2)
            if np.max(np.abs(f - g)) > EVEN_TOL * f.max():
                raise MeasureNotEven("density flagged even is not antipodally symmetric")
            f = 0.5 * (f + g)
        object.__setattr__(self, "density", _readonly(f))

    @classmethod
    def uniform(cls, grid: Grid, mass: float = 1.0) -> "MeasureDensity":
        return cls(grid, np.full(grid.size, mass / (2 * np.pi)), even=True)

    @classmethod
    def from_function(cls, grid: Grid, fn, even: bool = False) -> "MeasureDensity":
        return cls(grid, np.asarray(fn(grid.nodes), dtype=float) * np.ones(grid.size), even)

    @property
    def field(self) -> ScalarField:
        return ScalarField(self.grid, self.density)

    @property
    def mass(self) -> float:
        return self.grid.integrate(self.density)

    @property
    def is_even(self) -> bool:
        f = self.density
        return bool(np.max(np.abs(f - np.roll(f, self.grid.size // 2))) <= EVEN_TOL * f.max())

    def spread(self) -> float:
        """Smallest eigenvalue of the second moment ``int u u^T dmu`` over the mass."""
        u = self.grid.directions
        m = (u * self.density[:, None]).T @ u * self.grid.weight
        return float(np.linalg.eigvalsh(m)[0] / self.mass)

    def scaled(self, factor: float) -> "MeasureDensity":
        return MeasureDensity(self.grid, self.density * factor, self.even)


@dataclass
class VariationalOptions:
    max_iter: int = 2000
    step0: float | None = None
    tol_kkt: float = 1e-3
    step_min: float = 1e-14
    initial: Body | None = None
    smoothing: float = 1.0
    use_newton: bool = True


@dataclass
class VariationalReport:
    body: Body
    p: float
    objective: float
    lam: float
    kkt_residual: float
    gamma: float
    iterations: int
    converged: bool
    history: list = field(default_factory=list, repr=False)


def _check_grid(body: Body, mu: MeasureDensity):
    if body.grid != mu.grid:
        raise GridMismatch(f"body on {body.grid.size} nodes, measure on {mu.grid.size}")


def functional_J(body: Body, mu: MeasureDensity, p: float) -> float:
    if not p < 0:
        raise UnsupportedExponent(f"J is defined for p < 0, got {p}")
    _check_grid(body, mu)
    return -mu.grid.integrate(body.h ** p * mu.density) / p


def functional_E(body: Body, mu: MeasureDensity) -> float:
    _check_grid(body, mu)
    return -mu.grid.integrate(np.log(body.h) * mu.density)


def objective(body: Body, mu: MeasureDensity, p: float) -> float:
    return functional_E(body, mu) if p == 0 else functional_J(body, mu, p)


def rescale_to_half(body: Body) -> Body:
    """Dilate the body so that its Gaussian volume is exactly 1/2."""
    gamma_of = scaled_volume_function(body)
    lo, hi = 1.0, 1.0
    while gamma_of(lo) > 0.5:
        lo *= 0.5
    while gamma_of(hi) < 0.5:
        hi *= 2.0
    if lo == hi:
        if gamma_of(lo) == 0.5:
            return body
        lo, hi = (0.5 * lo, hi) if gamma_of(lo) > 0.5 else (lo, 2 * hi)
    c = brentq(lambda s: gamma_of(s) - 0.5, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=200)
    return scale_body(body, c)


def lagrange_data(body: Body, mu: MeasureDensity, p: float) -> tuple[float, float]:
    """Return ``(lambda, kkt_residual)`` with ``lambda = mu(S^1) / S_p(K)(S^1)``.

    The residual is ``max |lambda s_p - f| / f`` over nodes where ``f > 0``.
    """
    _check_grid(body, mu)
    s = lp_density(body, p).values
    f = mu.density
    lam = mu.mass / body.grid.integrate(s)
    pos = f > 0
    err = np.abs(lam * s - f)
    res = np.max(err[pos] / f[pos])
    if not pos.all():
        res = max(res, float(np.max(err[~pos]) / np.mean(f)))
    return float(lam), float(res)


def _precondition(grid: Grid, v: np.ndarray, smoothing: float) -> np.ndarray:
    k = grid.wavenumbers
    return np.fft.irfft(np.fft.rfft(v) / (1.0 + smoothing * k * k), n=grid.size)


def _tangent_direction(body: Body, mu: MeasureDensity, p: float, smoothing: float):
    """Ascent direction tangent to the level set ``gamma = 1/2``.

    The L2 gradient of the objective is ``-h^(p-1) f`` and that of the
    Gaussian volume is the Gaussian surface area density ``s_1``.  Both are
    smoothed by ``(1 - smoothing d^2/dtheta^2)^-1`` (an H^1 gradient) and the
    component along the constraint gradient is removed in that metric.
    """
    g = -(body.h ** (p - 1.0)) * mu.density
    s1 = lp_density(body, 1.0).values
    pg = _precondition(body.grid, g, smoothing)
    ps = _precondition(body.grid, s1, smoothing)
    alpha = np.dot(pg, s1) / np.dot(ps, s1)
    return pg - alpha * ps


def _newton_direction(body: Body, mu: MeasureDensity, p: float):
    """Newton step on the Lagrange system, restricted to the tangent space.

    Solves the bordered system ``[[H, -s1], [s1^T, 0]] (d, nu) = (-(g + lam s1), 0)``
    where ``H`` is the Hessian of the Lagrangian ``objective + lam * gamma``
    written in the L2 pairing on the grid.
    """
    g_ = body.grid
    h, dh = body.h, body.dh
    f = mu.density
    grad = -(h ** (p - 1.0)) * f
    s1 = lp_density(body, 1.0).values
    lam = -np.dot(grad, s1) / np.dot(s1, s1)
    c = body.curvature_radius
    e = np.exp(-0.5 * (dh ** 2 + h ** 2)) / (2 * np.pi)
    ds1 = e[:, None] * (g_.matrix(2) + np.eye(g_.size)
                        - (c * dh)[:, None] * g_.matrix(1) - np.diag(c * h))
    hess = np.diag(-(p - 1.0) * h ** (p - 2.0) * f) + lam * ds1
    n = g_.size
    kkt = np.zeros((n + 1, n + 1))
    kkt[:n, :n] = hess
    kkt[:n, n] = s1
    kkt[n, :n] = s1
    rhs = np.append(-(grad + lam * s1), 0.0)
    try:
        sol = np.linalg.solve(kkt, rhs)
    except np.linalg.LinAlgError:
        return None
    d = sol[:n]
    if not np.all(np.isfinite(d)) or np.dot(grad, d) <= 0:
        return None
    return d


def _project(h: np.ndarray, grid: Grid) -> tuple[Body, float]:
    """Wulff re-convexification, symmetrisation and rescaling; also the clip size."""
    w = wulff_shape(h, grid)
    clipped = float(np.max(h - w.h))
    return rescale_to_half(symmetrize(w)), clipped


def _line_search(body, d, step, mu, p, obj, step_min):
    """Halve ``step`` until the projected trial does not lower the objective."""
    dmax = float(np.max(np.abs(d)))
    while step * dmax >= step_min:
        trial = body.h + step * d
        if trial.min() > 0:
            try:
                cand, clipped = _project(trial, body.grid)
            except NonPositiveSupport:
                cand, clipped = None, np.inf
            if clipped <= 1e-12 * trial.max():
                new = objective(cand, mu, p)
                if new >= obj - 1e-14 * max(1.0, abs(obj)):
                    return cand, new, step
        step *= 0.5
    return None


def variational_solve(mu: MeasureDensity, p: float,
                      opts: VariationalOptions | None = None) -> VariationalReport:
    """Maximise the objective over even bodies with Gaussian volume 1/2.

    Each iteration moves along an ascent direction, re-convexifies with the
    Wulff shape, symmetrises and rescales to volume 1/2, backtracking until the
    objective does not decrease.  The direction is the Newton step of the
    Lagrange system when that is an ascent direction, and otherwise the H^1
    gradient projected onto the tangent space of the volume constraint.
    """
    opts = opts or VariationalOptions()
    if p > 0:
        raise UnsupportedExponent(f"the variational solver needs p <= 0, got {p}")
    if not mu.is_even:
        raise MeasureNotEven("the variational solver needs an even measure")
    if mu.spread() <= SPREAD_TOL:
        raise MeasureConcentrated("measure is concentrated on a great subsphere")
    if not mu.even:
        mu = MeasureDensity(mu.grid, mu.density, even=True)
    grid = mu.grid
    start = opts.initial if opts.initial is not None else ball(grid, 1.0)
    _check_grid(start, mu)
    body = rescale_to_half(symmetrize(start))
    obj = objective(body, mu, p)
    history = [obj]
    grad_step = None
    it = 0
    converged = False
    lam, kkt = lagrange_data(body, mu, p)
    while it < opts.max_iter:
        if kkt <= opts.tol_kkt:
            converged = True
            break
        found = None
        d = _newton_direction(body, mu, p) if opts.use_newton else None
        if d is not None:
            cap = 0.5 * body.h.min() / float(np.max(np.abs(d)))
            found = _line_search(body, d, min(1.0, cap), mu, p, obj, opts.step_min)
        if found is None:
            d = _tangent_direction(body, mu, p, opts.smoothing)
            if grad_step is None:
                first = opts.step0 if opts.step0 is not None else 0.1 * body.h.min()
                grad_step = first / float(np.max(np.abs(d)))
            found = _line_search(body, d, grad_step, mu, p, obj, opts.step_min)
            if found is None:
                raise NoProgress(f"line search stalled at iteration {it} "
                                 f"with KKT residual {kkt:.3e}")
            grad_step = 2.0 * found[2]
        body, obj = found[0], found[1]
        history.append(obj)
        it += 1
        lam, kkt = lagrange_data(body, mu, p)
        log.debug("iter %d objective %.15g kkt %.3e", it, obj, kkt)
    if not converged:
        log.warning("variational solver stopped after %d iterations, KKT residual %.3e",
                    it, kkt)
    return VariationalReport(body, float(p), obj, lam, kkt, gaussian_volume(body), it,
                             converged, history)
