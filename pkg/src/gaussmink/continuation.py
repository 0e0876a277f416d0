"""Planar L_p Gaussian Minkowski problem for p >= 1 by homotopy continuation.

The unknown support function solves

    F(h) = (h'' + h) - 2 pi h^(p-1) exp((h'^2 + h^2)/2) f = 0,

which is the density equation ``s_p(h) = f`` with the Gaussian weight moved to
the right.  Starting from a constant density ``c0``, whose solution is a disk,
the density is deformed linearly to ``f`` and each intermediate problem is
solved by damped Newton with the exact spectral Jacobian.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .circle_grid import Grid, ScalarField
from .convex_body import Body, _make_body, hausdorff_distance
from .errors import (GaussMinkError, GridMismatch, HomotopyStalled, InvalidMeasure,
                     MassBoundViolated, NewtonDiverged, NewtonSingular, NonConvexIterate,
                     NonPositiveIterate, NoRoot, UnsupportedExponent)
from .gauss_measure import gaussian_volume, half_volume_bound

log = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


@dataclass
class HomotopyConfig:
    p: float
    steps_init: int = 1
    step_min: float = 1e-4
    newton_tol: float = 1e-10
    newton_max: int = 30
    c0: float | str = "auto"
    override_mass_bound: bool = False

    def __post_init__(self):
        if not self.p >= 1:
            raise UnsupportedExponent(f"continuation needs p >= 1, got {self.p}")
        if self.steps_init < 1 or not 0 < self.step_min <= 1:
            raise ValueError("steps_init must be >= 1 and step_min in (0, 1]")


@dataclass
class SolveReport:
    body: Body
    p: float
    residual_linf: float
    gamma: float
    homotopy_steps_used: int
    newton_iterations_total: int
    mass: float
    c0: float
    s0: float
    bounds: tuple[float, float] | None = None
    warnings: list[str] = field(default_factory=list)


def _values(x) -> tuple[Grid | None, np.ndarray]:
    if isinstance(x, ScalarField):
        return x.grid, np.asarray(x.values)
    if isinstance(x, Body):
        return x.grid, np.asarray(x.h)
    if hasattr(x, "density") and hasattr(x, "grid"):
        return x.grid, np.asarray(x.density)
    a = np.asarray(x, dtype=float)
    return None, a


def _grid_of(*xs) -> Grid:
    grids = [g for g, _ in map(_values, xs) if g is not None]
    if grids:
        if any(g != grids[0] for g in grids):
            raise GridMismatch("inputs live on different grids")
        return grids[0]
    return Grid(len(_values(xs[0])[1]))


# ------------------------------------------------------------- the equation

def residual(h, f, p: float) -> np.ndarray:
    g = _grid_of(h, f)
    h, f = _values(h)[1], _values(f)[1]
    if np.any(h <= 0):
        raise NonPositiveIterate("support function must stay positive")
    dh = g.derivative(h, 1)
    d2h = g.derivative(h, 2)
    return d2h + h - TWO_PI * h ** (p - 1.0) * np.exp(0.5 * (dh * dh + h * h)) * f


def linearized_apply(h, delta, f, p: float) -> np.ndarray:
    """Derivative of :func:`residual` at ``h`` applied to an additive variation."""
    g = _grid_of(h, delta, f)
    h, delta, f = _values(h)[1], _values(delta)[1], _values(f)[1]
    dh = g.derivative(h, 1)
    ew = TWO_PI * f * np.exp(0.5 * (dh * dh + h * h))
    lin = (p - 1.0) * h ** (p - 2.0) * delta \
        + h ** (p - 1.0) * (dh * g.derivative(delta, 1) + h * delta)
    return g.derivative(delta, 2) + delta - ew * lin


def linearized_apply_multiplicative(h, phi, f, p: float) -> np.ndarray:
    """Derivative along ``h exp(eps phi)``, written out term by term.

    Equals ``linearized_apply(h, h * phi, f, p)``; kept separate as a cross
    check of the Jacobian.
    """
    g = _grid_of(h, phi, f)
    h, phi, f = _values(h)[1], _values(phi)[1], _values(f)[1]
    dh, d2h = g.derivative(h, 1), g.derivative(h, 2)
    dphi, d2phi = g.derivative(phi, 1), g.derivative(phi, 2)
    e = np.exp(0.5 * (dh * dh + h * h))
    left = d2h * phi + 2.0 * dh * dphi + h * d2phi + h * phi
    right = (p - 1.0) * h ** (p - 1.0) * e * phi \
        + h ** (p - 1.0) * e * (dh * dh + h * h) * phi \
        + h ** p * e * dh * dphi
    return left - TWO_PI * f * right


def jacobian(h, f, p: float) -> np.ndarray:
    """Dense matrix of :func:`linearized_apply`."""
    g = _grid_of(h, f)
    h, f = _values(h)[1], _values(f)[1]
    dh = g.derivative(h, 1)
    ew = TWO_PI * f * np.exp(0.5 * (dh * dh + h * h))
    diag = ew * ((p - 1.0) * h ** (p - 2.0) + h ** p)
    jac = g.matrix(2) - (ew * h ** (p - 1.0) * dh)[:, None] * g.matrix(1)
    jac[np.diag_indices(g.size)] += 1.0 - diag
    return jac


# ------------------------------------------------------------ constant data

def _log_profile(s: float, p: float) -> float:
    """``log`` of ``(1/2pi) s^(2-p) exp(-s^2/2)``, the density of the disk of radius s."""
    return (2.0 - p) * math.log(s) - 0.5 * s * s - math.log(TWO_PI)


def constant_solution(c0: float, p: float, bracket: tuple[float, float] | None = None,
                      branch: str = "upper") -> float:
    """Radius ``s`` of the disk whose ``S_p`` density is the constant ``c0``.

    For ``p < 2`` the profile rises to a maximum at ``sqrt(2 - p)`` and falls
    again; ``branch="upper"`` picks the larger root, the one with Gaussian
    volume above 1/2 whenever the mass bound holds.
    """
    if not c0 > 0:
        raise NoRoot(f"constant density must be positive, got {c0}")
    target = math.log(c0)
    if p == 2:
        val = -2.0 * math.log(TWO_PI * c0)
        if val <= 0:
            raise NoRoot(f"no disk has constant density {c0} at p = 2")
        return math.sqrt(val)

    def fn(s):
        return _log_profile(s, p) - target

    if bracket is None:
        if p > 2:
            lo, hi = 1.0, 1.0
            while fn(lo) < 0:
                lo *= 0.5
            while fn(hi) > 0:
                hi *= 2.0
        else:
            peak = math.sqrt(2.0 - p)
            if fn(peak) < 0:
                raise NoRoot(f"constant density {c0} exceeds the maximal disk density "
                             f"{math.exp(_log_profile(peak, p)):.6g} at p = {p}")
            if fn(peak) == 0:
                return peak
            if branch == "upper":
                lo, hi = peak, 2.0 * peak + 1.0
                while fn(hi) > 0:
                    hi *= 2.0
            elif branch == "lower":
                lo, hi = peak, peak
                while fn(lo) > 0:
                    lo *= 0.5
            else:
                raise ValueError(f"unknown branch {branch!r}")
    else:
        lo, hi = bracket
        if fn(lo) * fn(hi) > 0:
            raise NoRoot(f"bracket [{lo}, {hi}] does not enclose a root")
    s = brentq(fn, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=500)
    # one Newton polish in the linear form of the equation
    val = math.exp(_log_profile(s, p)) - c0
    der = math.exp(_log_profile(s, p)) * ((2.0 - p) / s - s)
    if der != 0 and abs(val / der) < 1e-12 * s:
        s -= val / der
    return s


def constant_spectrum(s0: float, p: float, k: int, n: int = 2) -> float:
    """Eigenvalue of the linearisation at the disk of radius ``s0`` on mode ``k``.

    Along multiplicative variations ``s0 exp(eps phi)`` the operator acts on
    spherical harmonics of degree ``k`` by ``s0^(n-2) (-k^2 + (n - p) - s0^2)``
    in the normalisation used here; in the plane this is also the eigenvalue
    of :func:`linearized_apply` on ``cos k theta``.
    """
    return s0 ** (n - 2) * (-(k * (k + n - 2)) + (n - p) - s0 * s0)


def kernel_modes(s0: float, p: float, kmax: int, tol: float = 1e-9) -> list[int]:
    """Wavenumbers up to ``kmax`` where the constant-solution spectrum vanishes."""
    return [k for k in range(kmax + 1) if abs(constant_spectrum(s0, p, k)) <= tol]


def mass_bound(p: float, n: int = 2) -> float:
    """Upper bound on the mass of ``f`` for which solutions with volume > 1/2 exist."""
    return half_volume_bound(p, n)


def apriori_bounds(f, p: float) -> tuple[float, float]:
    """Bounds ``lo <= h <= hi`` for every solution when ``p > 2``.

    At a minimum of ``h`` the equation gives ``profile(h_min) <= max f`` and at
    a maximum ``profile(h_max) >= min f``; the disk profile is decreasing for
    ``p > 2``, so both bounds come from scalar root finding.
    """
    if not p > 2:
        raise UnsupportedExponent("a priori bounds are available for p > 2 only")
    vals = _values(f)[1]
    return constant_solution(float(vals.max()), p), constant_solution(float(vals.min()), p)


# ------------------------------------------------------------------ solvers

class _NewtonFailure(Exception):
    def __init__(self, reason: str, error: type[GaussMinkError]):
        super().__init__(reason)
        self.error = error


def _convex_enough(g: Grid, h: np.ndarray) -> bool:
    return bool(np.min(g.derivative(h, 2) + h) > 0)


def _newton(g: Grid, h: np.ndarray, f: np.ndarray, p: float, tol: float, max_iter: int):
    """Damped Newton; returns ``(h, iterations, residual)`` or raises ``_NewtonFailure``."""
    r = residual(ScalarField(g, h), f, p)
    nr = float(np.max(np.abs(r)))
    for it in range(max_iter + 1):
        if nr <= tol:
            return h, it, nr
        if it == max_iter:
            break
        jac = jacobian(ScalarField(g, h), f, p)
        try:
            delta = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError as exc:
            raise _NewtonFailure(str(exc), NewtonSingular) from None
        if not np.all(np.isfinite(delta)):
            raise _NewtonFailure("Newton step is not finite", NewtonSingular)
        damping, reason = 1.0, None
        while damping >= 1.0 / 1024:
            trial = h + damping * delta
            if trial.min() <= 0:
                reason = NonPositiveIterate
            elif not _convex_enough(g, trial):
                reason = NonConvexIterate
            else:
                rt = residual(ScalarField(g, trial), f, p)
                nt = float(np.max(np.abs(rt)))
                if np.isfinite(nt) and nt < (1.0 - 1e-4 * damping) * nr:
                    h, r, nr = trial, rt, nt
                    break
                reason = NewtonDiverged
            damping *= 0.5
        else:
            raise _NewtonFailure(f"no acceptable damping at residual {nr:.3e}",
                                 reason or NewtonDiverged)
    raise _NewtonFailure(f"Newton did not converge, residual {nr:.3e}", NewtonDiverged)


def _check_density(f) -> tuple[Grid, np.ndarray]:
    g, vals = _values(f)
    g = g or Grid(len(vals))
    if not np.all(np.isfinite(vals)) or np.any(vals <= 0):
        raise InvalidMeasure("continuation needs a strictly positive density")
    return g, vals


def _auto_c0(vals: np.ndarray, p: float) -> float:
    if np.all(vals == vals[0]):
        return float(vals[0])
    try:
        radii = np.array([constant_solution(float(v), p) for v in vals])
    except NoRoot:
        return float(np.mean(vals))
    s = float(np.exp(np.mean(np.log(radii))))
    return math.exp(_log_profile(s, p))


def continuation_solve(f, cfg: HomotopyConfig) -> SolveReport:
    """Solve ``s_p(h) = f`` by following ``f_t = (1 - t) c0 + t f`` from ``t = 0``."""
    g, vals = _check_density(f)
    p = float(cfg.p)
    mass = g.integrate(vals)
    notes: list[str] = []
    if 1 <= p <= 2:
        bound = mass_bound(p)
        if mass >= bound:
            if not cfg.override_mass_bound:
                raise MassBoundViolated(f"mass {mass:.6g} is not below the bound "
                                        f"{bound:.6g} at p = {p}")
            notes.append(f"mass bound overridden: {mass:.6g} >= {bound:.6g}")
    c0 = _auto_c0(vals, p) if cfg.c0 == "auto" else float(cfg.c0)
    s0 = constant_solution(c0, p)
    if kernel_modes(s0, p, g.size // 2):
        c0 *= 1.01
        s0 = constant_solution(c0, p)
        notes.append("constant start was degenerate; c0 perturbed by 1%")

    h = np.full(g.size, s0)
    t, dt = 0.0, 1.0 / cfg.steps_init
    steps = iters = 0
    while t < 1.0:
        t_new = min(1.0, t + dt)
        ft = vals if t_new == 1.0 else (1.0 - t_new) * c0 + t_new * vals
        try:
            h_new, k, _ = _newton(g, h, ft, p, cfg.newton_tol, cfg.newton_max)
        except _NewtonFailure as exc:
            dt *= 0.5
            log.debug("homotopy step to t=%.6g failed (%s); dt -> %.3g", t_new, exc, dt)
            if dt < cfg.step_min:
                err = exc.error if exc.error is not NewtonDiverged else HomotopyStalled
                if err in (NewtonSingular, NonConvexIterate):
                    raise err(f"homotopy stalled at t = {t:.6g}: {exc}") from None
                raise HomotopyStalled(f"homotopy stalled at t = {t:.6g}: {exc}") from None
            continue
        h, t = h_new, t_new
        steps += 1
        iters += k
        if k <= 3:
            dt *= 2.0

    body = _make_body(g, h)
    res = float(np.max(np.abs(residual(ScalarField(g, h), vals, p))))
    gam = gaussian_volume(body)
    if 1 <= p <= 2 and gam <= 0.5:
        notes.append(f"Gaussian volume {gam:.6g} is not above 1/2")
        log.warning(notes[-1])
    bounds = apriori_bounds(vals, p) if p > 2 else None
    return SolveReport(body, p, res, gam, steps, iters, mass, c0, s0, bounds, notes)


@dataclass
class ProbeResult:
    distance: float
    bodies: list
    failed: list


def uniqueness_probe(f, p: float, inits, tol: float = 1e-10,
                     max_iter: int = 60) -> ProbeResult:
    """Run Newton on the full equation from several starts.

    Returns the largest pairwise Hausdorff distance between the converged
    solutions; starts that fail to converge are listed in ``failed``.
    """
    g, vals = _check_density(f)
    bodies, failed = [], []
    for i, init in enumerate(inits):
        h0 = np.array(_values(init)[1], dtype=float)
        try:
            h, _, _ = _newton(g, h0, vals, p, tol, max_iter)
        except _NewtonFailure as exc:
            log.warning("uniqueness probe: start %d failed (%s: %s)", i,
                        exc.error.__name__, exc)
            failed.append(i)
            continue
        bodies.append(_make_body(g, h))
    dist = 0.0
    for i in range(len(bodies)):
        for j in range(i + 1, len(bodies)):
            dist = max(dist, hausdorff_distance(bodies[i], bodies[j]))
    return ProbeResult(dist, bodies, failed)
