import json
import math

import numpy as np
import pytest

from gaussmink import verify_suite as vs
from gaussmink.circle_grid import Grid
from gaussmink.gauss_measure import LpDensity


def test_rows_and_results():
    r = vs.Row("s", "c", "q", 1.0, 0.5, 0.7)
    assert not r.ok
    assert vs.Row("s", "c", "q", 1.0, math.inf, 5.0).ok
    res = vs._finish("s", [r], 1, 0.5, 0.0)
    assert not res.passed and res.failures() == [r]
    assert res.to_csv().splitlines()[0] == ",".join(vs.CSV_HEADER)
    json.dumps(res.to_dict())


def test_random_bodies_are_admissible():
    rng = np.random.default_rng(0)
    g = Grid(256)
    for _ in range(5):
        a, b = vs.random_coefficients(rng)
        assert np.all(np.abs(a) <= vs.COEFF_RANGE) and np.all(np.abs(b) <= vs.COEFF_RANGE)
        assert vs.curvature_samples(a, b, 4096).min() > 0
        k = vs.trig_body(g, 1.0, a, b)
        assert k.curvature_radius.min() > 0


def test_generators_are_seeded():
    g = Grid(64)
    a = vs.random_body(np.random.default_rng(5), g)
    b = vs.random_body(np.random.default_rng(5), g)
    assert np.array_equal(a.h, b.h)
    assert vs.random_positive_field(np.random.default_rng(1), g).min() > 0


def test_duality_small():
    res = vs.run_duality_suite(seed=1, count=5, grid_size=512)
    assert res.passed and res.cases == 5
    balls = vs.run_duality_suite(seed=1, count=5, grid_size=256, family="balls")
    assert balls.passed and balls.worst_violation < 1e-12
    with pytest.raises(ValueError):
        vs.run_duality_suite(count=1, family="cubes")


def test_variation_small():
    res = vs.run_variation_suite(seed=2, count=2)
    assert res.passed


def test_isoperimetric_small():
    res = vs.run_isoperimetric_suite(seed=3, count=5)
    assert res.passed
    spot = {r.case: r for r in res.rows if r.case in ("unit-disk", "half-disk")}
    assert spot["unit-disk"].value == pytest.approx(0.303265, abs=1e-6)
    assert spot["half-disk"].value == pytest.approx(0.189763, abs=1e-6)


def test_variation_suite_detects_a_wrong_density(monkeypatch):
    real = vs.lp_density

    def skewed(body, p):
        d = real(body, p)
        return LpDensity(d.p, d.grid, d.values * (1 + 1e-4))

    monkeypatch.setattr(vs, "lp_density", skewed)
    assert not vs.run_variation_suite(seed=2, count=1).passed


def test_isoperimetric_suite_detects_a_wrong_bound(monkeypatch):
    monkeypatch.setattr(vs, "half_volume_bound", lambda p: 10.0)
    assert not vs.run_isoperimetric_suite(seed=0, count=1).passed


def test_run_suite_registry():
    assert set(vs.SUITES) == {"duality", "variation", "isoperimetric", "solver"}
    with pytest.raises(ValueError):
        vs.run_suite("nope")
