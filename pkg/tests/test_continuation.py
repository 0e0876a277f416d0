import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gaussmink import continuation as cont
from gaussmink.circle_grid import Grid, ScalarField
from gaussmink.continuation import (HomotopyConfig, apriori_bounds, constant_solution,
                                    constant_spectrum, continuation_solve, jacobian, kernel_modes,
                                    linearized_apply, linearized_apply_multiplicative, mass_bound,
                                    residual, uniqueness_probe)
from gaussmink.convex_body import ball
from gaussmink.errors import (GridMismatch, HomotopyStalled, InvalidMeasure, MassBoundViolated,
                              NewtonSingular, NonPositiveIterate, NoRoot, UnsupportedExponent)
from gaussmink.gauss_measure import gaussian_volume, lp_density
from gaussmink.verify_suite import continuation_target, linearization_fd_error, spectrum_error

from conftest import random_pair

C0 = math.exp(-0.5) / (2 * math.pi)


def disk_density(s, p):
    return s ** (2 - p) * math.exp(-s * s / 2) / (2 * math.pi)


def test_config_validation():
    with pytest.raises(UnsupportedExponent):
        HomotopyConfig(p=0.5)
    with pytest.raises(ValueError):
        HomotopyConfig(p=3, steps_init=0)
    with pytest.raises(ValueError):
        HomotopyConfig(p=3, step_min=2.0)


def test_residual_vanishes_on_disk():
    g = Grid(64)
    for p in (1.0, 2.0, 3.0):
        s = 1.3
        f = np.full(64, disk_density(s, p))
        assert np.max(np.abs(residual(ball(g, s), f, p))) < 1e-13


def test_residual_is_density_mismatch(rng):
    # F = 0 exactly where s_p(h) = f
    g = Grid(128)
    k, _ = random_pair(rng, g)
    s = lp_density(k, 3.0).values
    assert np.max(np.abs(residual(k, s, 3.0))) < 1e-12


def test_residual_errors():
    g = Grid(32)
    with pytest.raises(NonPositiveIterate):
        residual(np.zeros(32), np.ones(32), 3.0)
    with pytest.raises(GridMismatch):
        residual(ScalarField(g, np.ones(32)), ScalarField(Grid(64), np.ones(64)), 3.0)


@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 3.0, 5.0])
def test_linearization_matches_finite_differences(rng, p):
    g = Grid(128)
    k, _ = random_pair(rng, g)
    f = lp_density(k, p).values * (1 + 0.1 * np.cos(g.nodes))
    assert linearization_fd_error(k, f, p, rng) < 1e-6


def test_multiplicative_form_and_dense_jacobian(rng):
    g = Grid(64)
    k, _ = random_pair(rng, g)
    f = np.full(64, C0)
    phi = np.sin(3 * g.nodes) + 0.2 * np.cos(g.nodes)
    a = linearized_apply_multiplicative(k, phi, f, 3.0)
    b = linearized_apply(k, k.h * phi, f, 3.0)
    assert np.max(np.abs(a - b)) < 1e-11
    assert np.max(np.abs(jacobian(k, f, 3.0) @ phi - linearized_apply(k, phi, f, 3.0))) < 1e-11


@pytest.mark.parametrize("p", [1.0, 1.5, 3.0, 4.0])
def test_spectrum_at_constant_solutions(p):
    assert spectrum_error(Grid(128), 1.1, p) < 1e-6


def test_constant_spectrum_formula():
    assert constant_spectrum(1.0, 3.0, 2) == -4 + (2 - 3) - 1
    assert constant_spectrum(2.0, 3.0, 1, n=3) == 2.0 * (-2 - 4)
    # p = 1, s0 = 1 is the fold of the disk profile: the constant mode degenerates
    assert kernel_modes(1.0, 1.0, 10) == [0]
    assert kernel_modes(1.3, 3.0, 10) == []


@given(st.floats(0.2, 4.0), st.sampled_from([1.0, 1.5, 2.0, 2.5, 3.0, 6.0]))
def test_constant_solution_inverts_profile(s, p):
    c = disk_density(s, p)
    if p < 2 and s < math.sqrt(2 - p):
        s_found = constant_solution(c, p, branch="lower")
    else:
        s_found = constant_solution(c, p)
    assert abs(s_found - s) < 1e-10 * max(1, s)


def test_constant_solution_errors():
    with pytest.raises(NoRoot):
        constant_solution(-1.0, 3.0)
    with pytest.raises(NoRoot):
        constant_solution(1.0, 1.0)  # above the peak disk density
    with pytest.raises(NoRoot):
        constant_solution(1.0, 2.0)
    with pytest.raises(NoRoot):
        constant_solution(0.05, 3.0, bracket=(5.0, 6.0))
    with pytest.raises(ValueError):
        constant_solution(0.05, 1.0, branch="middle")


def test_upper_branch_has_large_volume():
    c = 0.8 * mass_bound(1.0) / (2 * math.pi)
    s = constant_solution(c, 1.0)
    assert 1 - math.exp(-s * s / 2) > 0.5


def test_mass_bound_values():
    assert mass_bound(1.0) == pytest.approx(0.398942, abs=1e-6)
    assert mass_bound(2.0) == pytest.approx(1 / (2 * math.pi))


def test_continuation_reference_case():
    g = Grid(256)
    rep = continuation_solve(continuation_target(g), HomotopyConfig(p=3))
    assert rep.residual_linf < 1e-9
    assert rep.homotopy_steps_used <= 10
    lo, hi = rep.bounds
    assert lo - 1e-9 <= rep.body.h.min() and rep.body.h.max() <= hi + 1e-9
    # the solution reproduces the prescribed density
    s = lp_density(rep.body, 3.0).values
    assert np.max(np.abs(s - continuation_target(g))) < 1e-9


def test_constant_density_is_exact():
    s0 = 1.4
    f = np.full(64, disk_density(s0, 3.0))
    rep = continuation_solve(f, HomotopyConfig(p=3))
    assert rep.homotopy_steps_used == 1
    assert np.all(rep.body.h == rep.s0)
    assert rep.s0 == pytest.approx(s0, abs=1e-14)


@pytest.mark.parametrize("p", [1.0, 1.5, 2.0])
def test_small_mass_solutions_have_large_volume(p):
    g = Grid(128)
    f = (1 + 0.2 * np.cos(2 * g.nodes)) * 0.8 * mass_bound(p) / (2 * math.pi)
    rep = continuation_solve(f, HomotopyConfig(p=p))
    assert rep.residual_linf < 1e-9
    assert rep.gamma > 0.5
    assert gaussian_volume(rep.body) == rep.gamma


def test_mass_gate():
    f = np.full(64, mass_bound(1.0) / (2 * math.pi))
    with pytest.raises(MassBoundViolated):
        continuation_solve(f * (1 + 1e-12), HomotopyConfig(p=1))
    try:
        rep = continuation_solve(f * 0.999, HomotopyConfig(p=1))
    except MassBoundViolated:
        pytest.fail("mass below the bound was rejected")
    assert rep.residual_linf < 1e-9
    rep = continuation_solve(f * 0.9, HomotopyConfig(p=1, override_mass_bound=True))
    assert not rep.warnings


def test_mass_gate_override_reports():
    f = np.full(64, 1.2 * mass_bound(1.0) / (2 * math.pi))
    rep = continuation_solve(f, HomotopyConfig(p=1, override_mass_bound=True))
    assert any("overridden" in w for w in rep.warnings)
    assert rep.residual_linf < 1e-12
    with pytest.raises(NoRoot):
        continuation_solve(f * 3, HomotopyConfig(p=1, override_mass_bound=True))


def test_invalid_density():
    with pytest.raises(InvalidMeasure):
        continuation_solve(np.zeros(32), HomotopyConfig(p=3))


def test_singular_jacobian(monkeypatch):
    g = Grid(64)
    monkeypatch.setattr(cont, "jacobian", lambda h, f, p: np.zeros((64, 64)))
    with pytest.raises(NewtonSingular):
        continuation_solve(continuation_target(g), HomotopyConfig(p=3))


def test_stall_is_reported():
    g = Grid(64)
    with pytest.raises(HomotopyStalled):
        continuation_solve(continuation_target(g, 0.6),
                           HomotopyConfig(p=3, newton_max=1, step_min=0.5))


def test_apriori_bounds():
    with pytest.raises(UnsupportedExponent):
        apriori_bounds(np.ones(32), 2.0)
    lo, hi = apriori_bounds(np.array([C0, 2 * C0] * 16), 3.0)
    assert lo < hi


def test_uniqueness_probe(rng):
    g = Grid(128)
    f = continuation_target(g)
    base = continuation_solve(f, HomotopyConfig(p=3)).body
    inits = [base.h * (1 + 0.05 * np.cos(k * g.nodes + rng.uniform(0, 6))) for k in (2, 3, 4)]
    probe = uniqueness_probe(f, 3.0, inits)
    assert not probe.failed and len(probe.bodies) == 3
    assert probe.distance < 1e-8


@given(st.integers(0, 2 ** 32 - 1))
def test_random_targets_for_large_p(seed):
    rng = np.random.default_rng(seed)
    g = Grid(64)
    k, _ = random_pair(rng, g, scale=(0.6, 1.6))
    f = lp_density(k, 3.0).values
    rep = continuation_solve(f, HomotopyConfig(p=3))
    assert rep.residual_linf < 1e-9
    # uniqueness for p > 2 means we recover the body that produced f
    assert np.max(np.abs(rep.body.h - k.h)) < 1e-8
