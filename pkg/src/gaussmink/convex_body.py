"""Planar convex bodies stored by their support function.

A body is the sample vector ``h_i = h(theta_i)`` of its support function at the
grid normals.  Geometrically this is the polygon cut out by the half-planes
``<x, u_i> <= h_i``.  The samples are those of a convex body exactly when every
half-plane touches the polygon, which in the plane is the three-point test

    h_{i-1} + h_{i+1} - 2 cos(dtheta) h_i >= 0,

a discrete form of ``h'' + h >= 0``.  Wulff shapes, convex hulls and polars are
computed exactly on that polygon; smooth bodies are recovered to second order
in the grid spacing and their derivatives come from the spectral calculus.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import minimize_scalar

from .circle_grid import Grid, ScalarField, _readonly
from .errors import (DegenerateGauss, GridMismatch, HullDegenerate, InvalidScale,
                     NonPositiveSupport, NotConvex)

CONVEX_SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class Body:
    """Convex body containing the origin in its interior.

    Build instances with :func:`body_from_support` or one of the geometric
    constructions; the constructor itself does not validate.
    """

    grid: Grid
    h: np.ndarray

    @property
    def support(self) -> ScalarField:
        return ScalarField(self.grid, self.h)

    @cached_property
    def dh(self) -> np.ndarray:
        return _readonly(self.grid.derivative(self.h, 1))

    @cached_property
    def d2h(self) -> np.ndarray:
        return _readonly(self.grid.derivative(self.h, 2))

    @cached_property
    def curvature_radius(self) -> np.ndarray:
        """Spectral ``h'' + h``, the planar ``det(D^2 h + h I)``."""
        return _readonly(self.d2h + self.h)

    @cached_property
    def discrete_curvature(self) -> np.ndarray:
        return _readonly(_three_point(self.grid, self.h))

    @cached_property
    def positions(self) -> np.ndarray:
        """Boundary points ``h u + h' u_perp`` at the grid normals, shape ``(N, 2)``."""
        u = self.grid.directions
        perp = np.column_stack([-u[:, 1], u[:, 0]])
        return _readonly(self.h[:, None] * u + self.dh[:, None] * perp)

    @cached_property
    def rho(self) -> np.ndarray:
        """Radial function at the grid directions."""
        return _readonly(_polygon_radial(self.grid, self.h))

    def __repr__(self):
        return (f"Body(N={self.grid.size}, h in [{self.h.min():.6g}, "
                f"{self.h.max():.6g}])")


@dataclass(frozen=True)
class BoundaryPoint:
    position: np.ndarray
    direction: float
    radius: float


def _three_point(grid: Grid, h: np.ndarray) -> np.ndarray:
    dt = grid.weight
    num = np.roll(h, 1) + np.roll(h, -1) - 2.0 * np.cos(dt) * h
    return num / (2.0 * (1.0 - np.cos(dt)))


def _make_body(grid: Grid, h, eps_convex: float | None = None) -> Body:
    h = np.array(grid.check_values(h), dtype=float)
    if h.ndim != 1:
        raise GridMismatch("support samples must be one dimensional")
    if not np.all(np.isfinite(h)):
        raise NonPositiveSupport("support samples must be finite")
    i = int(np.argmin(h))
    if h[i] <= 0:
        raise NonPositiveSupport(f"support value {h[i]:.6g} <= 0 at node {i}")
    eps = CONVEX_SLACK * h.max() if eps_convex is None else eps_convex
    d = _three_point(grid, h)
    j = int(np.argmin(d))
    if d[j] < -eps:
        raise NotConvex(f"support samples are not convex at node {j} "
                        f"(h''+h ~ {d[j]:.6g})", node=j, violation=float(-d[j]))
    return Body(grid, _readonly(h))


def body_from_support(h, grid: Grid | None = None, eps_convex: float | None = None) -> Body:
    """Validate support samples and build a body.

    ``h`` is a :class:`ScalarField` or an array paired with ``grid``.
    """
    if isinstance(h, ScalarField):
        if grid is not None and grid != h.grid:
            raise GridMismatch("field and grid disagree")
        grid, h = h.grid, h.values
    elif grid is None:
        grid = Grid(len(h))
    return _make_body(grid, h, eps_convex)


def ball(grid: Grid, r: float) -> Body:
    if not r > 0:
        raise InvalidScale(f"radius must be positive, got {r}")
    return Body(grid, _readonly(np.full(grid.size, float(r))))


def boundary_point(body: Body, theta: float) -> BoundaryPoint:
    """Boundary point whose outer normal is ``(cos theta, sin theta)``."""
    h = float(body.grid.interpolate(body.h, theta))
    dh = float(body.grid.interpolate(body.dh, theta))
    c, s = np.cos(theta), np.sin(theta)
    x = np.array([h * c - dh * s, h * s + dh * c])
    return BoundaryPoint(x, float(np.arctan2(x[1], x[0])), float(np.hypot(h, dh)))


def _refined_extremes(grid: Grid, fun, samples: np.ndarray) -> tuple[float, float]:
    """Minimum and maximum of a smooth periodic function, polished from the nodes."""
    width = grid.weight
    out = []
    for sign, i in ((1.0, int(np.argmin(samples))), (-1.0, int(np.argmax(samples)))):
        t0 = grid.nodes[i]
        res = minimize_scalar(lambda t: sign * fun(t), bounds=(t0 - width, t0 + width),
                              method="bounded", options={"xatol": 1e-13})
        out.append(sign * min(sign * samples[i], float(res.fun)))
    return out[0], out[1]


def support_extremes(body: Body) -> tuple[float, float]:
    """``(min h, max h)`` of the trigonometric interpolant of the support samples."""
    return _refined_extremes(body.grid, lambda t: float(body.grid.interpolate(body.h, t)),
                             body.h)


def radial_extremes(body: Body) -> tuple[float, float]:
    """``(min rho, max rho)`` over the smooth boundary curve ``h u + h' u_perp``."""
    r = np.hypot(body.h, body.dh)
    return _refined_extremes(body.grid, lambda t: boundary_point(body, t).radius, r)


# ---------------------------------------------------------------- hull helpers

def _cross(o, a, b):
    return (a[..., 0] - o[..., 0]) * (b[..., 1] - o[..., 1]) \
        - (a[..., 1] - o[..., 1]) * (b[..., 0] - o[..., 0])


def _star_hull(points: np.ndarray) -> np.ndarray:
    """Indices of the convex hull vertices of a star-shaped cyclic point list.

    The points must be listed counter-clockwise by angle around an interior
    origin.  Reflex and flat vertices of such a polygon are never hull
    vertices, so they are pruned in vectorised sweeps until none remain.
    """
    idx = np.arange(len(points))
    while len(idx) >= 3:
        p = points[idx]
        turn = _cross(np.roll(p, 1, axis=0), p, np.roll(p, -1, axis=0))
        keep = turn > 0
        if keep.all():
            break
        idx = idx[keep]
    if len(idx) < 3:
        raise HullDegenerate("fewer than three hull vertices")
    return idx


def _support_of_points(points: np.ndarray, directions: np.ndarray) -> np.ndarray:
    return np.max(directions @ points.T, axis=1)


def _polar_vertices(points: np.ndarray) -> np.ndarray:
    """Vertices ``v`` with ``<v, a> = <v, b> = 1`` for consecutive hull points."""
    a, b = points, np.roll(points, -1, axis=0)
    det = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
    return np.column_stack([(b[:, 1] - a[:, 1]) / det, (a[:, 0] - b[:, 0]) / det])


# ------------------------------------------------------------ constructions

def _unpack(f, grid):
    if isinstance(f, ScalarField):
        return f.grid, np.array(f.values)
    if isinstance(f, Body):
        return f.grid, np.array(f.h)
    f = np.asarray(f, dtype=float)
    return (grid or Grid(len(f))), f


def wulff_shape(f, grid: Grid | None = None) -> Body:
    """Largest convex body whose support function stays below ``f``.

    The body is the intersection of the half-planes ``<x, u_i> <= f_i``; its
    polar is the hull of the points ``u_i / f_i``.  Active half-planes keep
    their value exactly, the others take the support of the adjacent polygon
    vertex.
    """
    grid, f = _unpack(f, grid)
    grid.check_values(f)
    if not np.all(np.isfinite(f)) or np.any(f <= 0):
        raise NonPositiveSupport("Wulff shape needs strictly positive samples")
    u = grid.directions
    active = _star_hull(u / f[:, None])
    h = f.copy()
    inactive = np.ones(grid.size, dtype=bool)
    inactive[active] = False
    if inactive.any():
        verts = _polar_vertices(u[active] / f[active, None])
        # vertex k sits between active normals active[k] and active[k+1]
        owner = np.searchsorted(active, np.arange(grid.size), side="right") - 1
        owner %= len(active)
        j = np.nonzero(inactive)[0]
        h[j] = np.einsum("ij,ij->i", verts[owner[j]], u[j])
    return _make_body(grid, h)


def convex_hull_body(r, grid: Grid | None = None) -> Body:
    """Convex hull of the points ``r_i u_i``."""
    grid, r = _unpack(r, grid)
    grid.check_values(r)
    if not np.all(np.isfinite(r)) or np.any(r <= 0):
        raise NonPositiveSupport("hull needs strictly positive radii")
    pts = grid.directions * r[:, None]
    verts = pts[_star_hull(pts)]
    return _make_body(grid, _support_of_points(verts, grid.directions))


def polar_body(body: Body) -> Body:
    """Polar body, built as the hull of the points ``u_i / h_i``."""
    return convex_hull_body(1.0 / body.h, body.grid)


def symmetrize(body: Body) -> Body:
    """Origin-symmetric average ``(K - K) / 2``, exactly even on the grid."""
    half = body.grid.size // 2
    h = 0.5 * (body.h + np.roll(body.h, half))
    h = wulff_shape(h, body.grid).h
    h = 0.5 * (h + np.roll(h, half))
    return _make_body(body.grid, h)


def scale_body(body: Body, c: float) -> Body:
    if not (np.isfinite(c) and c > 0):
        raise InvalidScale(f"scale factor must be positive, got {c}")
    return Body(body.grid, _readonly(body.h * float(c)))


def hausdorff_distance(a: Body, b: Body) -> float:
    if a.grid != b.grid:
        raise GridMismatch(f"bodies on grids {a.grid.size} and {b.grid.size}")
    return float(np.max(np.abs(a.h - b.h)))


def is_even(body: Body) -> bool:
    return bool(np.array_equal(body.h, np.roll(body.h, body.grid.size // 2)))


# ------------------------------------------------------------ radial function

def _polygon_radial(grid: Grid, h: np.ndarray) -> np.ndarray:
    n = grid.size
    m = np.arange(-(n // 4), n // 4 + 1)
    c = np.cos(2.0 * np.pi * m / n)
    m, c = m[c > 1e-12], c[c > 1e-12]
    idx = (np.arange(n)[:, None] + m[None, :]) % n
    return np.min(h[idx] / c[None, :], axis=1)


def radial_from_support(body: Body, method: str = "polygon") -> ScalarField:
    """Radial function sampled at the grid directions.

    ``polygon`` returns the exact radial function of the half-plane polygon,
    ``ray distance = min_i h_i / <u, u_i>``.  ``boundary`` maps the spectral
    boundary points to their polar angles and interpolates with a periodic
    monotone cubic; it needs a strictly convex, smooth body.
    """
    if method == "polygon":
        return ScalarField(body.grid, body.rho)
    if method != "boundary":
        raise ValueError(f"unknown method {method!r}")
    x = body.positions
    u = np.unwrap(np.arctan2(x[:, 1], x[:, 0]))
    r = np.hypot(x[:, 0], x[:, 1])
    gaps = np.diff(np.append(u, u[0] + 2 * np.pi))
    if np.any(gaps <= 1e-12) or abs(u[-1] - u[0] - 2 * np.pi) > np.pi:
        raise DegenerateGauss("boundary directions are not strictly increasing")
    uu = np.concatenate([u - 2 * np.pi, u, u + 2 * np.pi])
    rr = np.tile(r, 3)
    target = np.mod(body.grid.nodes - u[0], 2 * np.pi) + u[0]
    return ScalarField(body.grid, PchipInterpolator(uu, rr)(target))
