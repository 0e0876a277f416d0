import numpy as np
import pytest
from hypothesis import settings

from gaussmink.circle_grid import Grid
from gaussmink.verify_suite import random_coefficients, trig_body

from oracles import TrigBody

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_pair(rng, grid, scale=(0.5, 2.0)):
    """A random smooth body together with its closed-form oracle twin."""
    a, b = random_coefficients(rng)
    c = rng.uniform(*scale)
    return trig_body(grid, c, a, b), TrigBody(c, a, b)


@pytest.fixture
def grid256():
    return Grid(256)


ACCEPTANCE: list[str] = []


@pytest.fixture
def verdict():
    """Record and assert one acceptance criterion."""
    def record(number, title, ok, detail=""):
        ACCEPTANCE.append(f"{'PASS' if ok else 'FAIL'} [{number:2d}] {title}: {detail}")
        assert ok, f"criterion {number} ({title}) failed: {detail}"
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split("[")[1].split("]")[0])):
            terminalreporter.write_line(line)
