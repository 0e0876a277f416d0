import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gaussmink.circle_grid import Grid, ScalarField
from gaussmink.convex_body import (_star_hull, ball, body_from_support, boundary_point,
                                   convex_hull_body, hausdorff_distance, is_even, polar_body,
                                   radial_extremes, radial_from_support, scale_body,
                                   support_extremes, symmetrize, wulff_shape)
from gaussmink.errors import (DegenerateGauss, GridMismatch, HullDegenerate, InvalidScale,
                              NonPositiveSupport, NotConvex)

from conftest import random_pair


def shifted_disk(g, r=1.0, x0=0.5):
    return body_from_support(r + x0 * np.cos(g.nodes), g)


def test_validation_errors():
    g = Grid(64)
    with pytest.raises(NonPositiveSupport):
        body_from_support(np.zeros(64), g)
    with pytest.raises(NonPositiveSupport):
        body_from_support(np.full(64, np.nan), g)
    with pytest.raises(NotConvex) as info:
        body_from_support(1 + 0.9 * np.cos(2 * g.nodes), g)
    assert info.value.node == 0 and info.value.violation > 0
    with pytest.raises(GridMismatch):
        body_from_support(np.ones(32), g)
    with pytest.raises(InvalidScale):
        ball(g, 0.0)
    with pytest.raises(InvalidScale):
        scale_body(ball(g, 1.0), -1.0)


def test_from_field_and_grid_inference():
    g = Grid(32)
    b = body_from_support(ScalarField(g, np.full(32, 2.0)))
    assert b.grid == g
    assert body_from_support(np.ones(32)).grid == g


def test_shifted_disk_radial_and_boundary():
    g = Grid(256)
    k = shifted_disk(g)
    rho = k.rho
    assert rho[0] == pytest.approx(1.5, abs=1e-12)
    assert rho[128] == pytest.approx(0.5, abs=1e-12)
    # exact circle radial: x0 cos u + sqrt(r^2 - x0^2 sin^2 u); polygon error is O(dt^2)
    u = g.nodes
    exact = 0.5 * np.cos(u) + np.sqrt(1 - 0.25 * np.sin(u) ** 2)
    assert np.max(np.abs(rho - exact)) < 5e-4
    bnd = radial_from_support(k, "boundary").values
    # the monotone cubic is only third order but still beats the polygon
    assert np.max(np.abs(bnd - exact)) < 5e-5
    p = boundary_point(k, 0.7)
    assert np.allclose(p.position, [0.5 + math.cos(0.7), math.sin(0.7)], atol=1e-12)
    assert p.radius == pytest.approx(np.hypot(*p.position))


def test_square_polar_is_diamond():
    g = Grid(64)
    t = g.nodes
    square = np.abs(np.cos(t)) + np.abs(np.sin(t))  # support of [-1,1]^2
    k = body_from_support(square, g)
    diamond = polar_body(k)
    assert np.max(np.abs(diamond.h - np.maximum(np.abs(np.cos(t)), np.abs(np.sin(t))))) < 1e-14


def test_square_has_degenerate_gauss_map():
    g = Grid(64)
    t = g.nodes
    k = body_from_support(np.abs(np.cos(t)) + np.abs(np.sin(t)), g)
    with pytest.raises(DegenerateGauss):
        radial_from_support(k, "boundary")
    with pytest.raises(ValueError):
        radial_from_support(k, "nope")


def test_star_hull_rejects_collinear_points():
    pts = np.column_stack([np.linspace(-1, 1, 5), np.zeros(5)])
    with pytest.raises(HullDegenerate):
        _star_hull(pts)


def test_wulff_against_qhull(rng):
    from oracles import wulff_support_qhull
    g = Grid(256)
    for _ in range(5):
        k, _ = random_pair(rng, g)
        f = k.h * (1 + 0.05 * rng.uniform(-1, 1, g.size))
        w = wulff_shape(f, g)
        assert np.all(w.h <= f + 1e-14)
        assert np.max(np.abs(w.h - wulff_support_qhull(g.nodes, f))) < 1e-12


def test_hull_against_qhull(rng):
    from oracles import hull_support_qhull
    g = Grid(256)
    for _ in range(5):
        r = rng.uniform(0.5, 1.5, g.size)
        assert np.max(np.abs(convex_hull_body(r, g).h - hull_support_qhull(g.nodes, r))) < 1e-12


def test_wulff_of_support_is_identity(rng):
    g = Grid(256)
    k, _ = random_pair(rng, g)
    assert hausdorff_distance(wulff_shape(k.h, g), k) < 1e-14
    assert hausdorff_distance(wulff_shape(k), k) < 1e-14


def test_polar_radial_duality(rng):
    g = Grid(1024)
    k, _ = random_pair(rng, g)
    kstar = polar_body(k)
    # rho_{K*} = 1/h_K up to the polygon discretisation
    assert np.max(np.abs(kstar.rho * k.h - 1)) < 2e-3
    assert hausdorff_distance(polar_body(kstar), k) < 2e-3


def test_extremes_continuous(rng):
    g = Grid(256)
    k, tb = random_pair(rng, g)
    lo, hi = support_extremes(k)
    t = np.linspace(0, 2 * np.pi, 20001)
    assert lo == pytest.approx(tb.h(t).min(), abs=1e-9)
    assert hi == pytest.approx(tb.h(t).max(), abs=1e-9)
    rlo, rhi = radial_extremes(k)
    # max rho = max h and min rho = min h for convex bodies containing 0
    assert rhi == pytest.approx(hi, abs=1e-9)
    assert rlo == pytest.approx(lo, abs=1e-9)


def test_symmetrize_is_even(rng):
    g = Grid(128)
    k, _ = random_pair(rng, g)
    s = symmetrize(k)
    assert is_even(s)
    assert not is_even(shifted_disk(g))
    assert is_even(symmetrize(shifted_disk(g)))


def test_hausdorff_grid_mismatch():
    with pytest.raises(GridMismatch):
        hausdorff_distance(ball(Grid(32), 1), ball(Grid(64), 1))


@given(st.floats(0.05, 20))
def test_ball_properties(r):
    g = Grid(64)
    b = ball(g, r)
    assert np.allclose(b.rho, r, rtol=1e-14)
    assert np.allclose(polar_body(b).h, 1 / r, rtol=1e-13)
    assert np.allclose(b.curvature_radius, r, rtol=1e-13)
    assert is_even(b)


@given(st.integers(0, 2 ** 32 - 1), st.floats(0.2, 5.0))
def test_scaling_commutes_with_constructions(seed, c):
    g = Grid(128)
    k, _ = random_pair(np.random.default_rng(seed), g)
    assert np.allclose(scale_body(k, c).rho, c * k.rho, rtol=1e-13)
    assert np.allclose(polar_body(scale_body(k, c)).h, polar_body(k).h / c, rtol=1e-12)


@given(st.integers(0, 2 ** 32 - 1))
def test_wulff_is_below_and_idempotent(seed):
    rng = np.random.default_rng(seed)
    g = Grid(64)
    f = rng.uniform(0.5, 1.5, g.size)
    w = wulff_shape(f, g)
    assert np.all(w.h <= f + 1e-13)
    assert np.max(np.abs(wulff_shape(w.h, g).h - w.h)) < 1e-12
