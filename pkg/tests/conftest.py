import math

import numpy as np
import pytest

from frieze_lab.curves import ConicCurve, PowerCurve, parse_curve_spec
from frieze_lab.frieze2 import TwoFrieze

TAU = 2 * math.pi

PERTURBED = {"type": "fourier", "T": TAU, "f": {"cos": [1.0, 0.05]}, "g": {"sin": [1.0]}}
# winds twice around the origin: locally convex but not convex
DOUBLE_LOOP = {"type": "fourier", "T": TAU, "f": {"cos": [0.5, 1.0]}, "g": {"sin": [0.5, 1.0]}}
LOPSIDED = {
    "type": "fourier",
    "T": TAU,
    "f": {"const": 0.1, "cos": [1.0, 0.04, 0.02], "sin": [0.0, 0.03]},
    "g": {"cos": [0.0, 0.02], "sin": [1.2, 0.0, 0.03]},
}


@pytest.fixture
def circle():
    return ConicCurve(1.0, 1.0)


@pytest.fixture
def ellipse():
    return ConicCurve(2.0, 3.0)


@pytest.fixture
def quadratic():
    return PowerCurve((2.0, 1.0, 0.0))


@pytest.fixture
def perturbed():
    return parse_curve_spec(PERTURBED)


@pytest.fixture
def lopsided():
    return parse_curve_spec(LOPSIDED)


@pytest.fixture
def double_loop():
    return parse_curve_spec(DOUBLE_LOOP)


@pytest.fixture
def circle_frieze(circle):
    return TwoFrieze(circle)


def central_diff(fn, x, h=1e-3, order=1):
    """Eighth-order central differences for first and second derivatives."""
    if order == 1:
        c = [4 / 5, -1 / 5, 4 / 105, -1 / 280]
        return sum(ck * (fn(x + (k + 1) * h) - fn(x - (k + 1) * h)) for k, ck in enumerate(c)) / h
    if order == 2:
        c0 = -205 / 72
        c = [8 / 5, -1 / 5, 8 / 315, -1 / 560]
        return (c0 * fn(x) + sum(ck * (fn(x + (k + 1) * h) + fn(x - (k + 1) * h)) for k, ck in enumerate(c))) / h**2
    raise ValueError(order)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def third_diff(fn, x, h=1e-2):
    """Sixth-order central difference for the third derivative."""
    w = [-7 / 240, 3 / 10, -169 / 120, 61 / 30]
    return sum(wk * (fn(x - (4 - k) * h) - fn(x + (4 - k) * h)) for k, wk in enumerate(w)) / h**3


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report_criterion():
    """Collect one PASS/FAIL line per acceptance criterion; printed in the terminal summary."""

    def record(number: int, checks: dict[str, tuple[bool, str]]):
        ok = all(passed for passed, _ in checks.values())
        detail = "; ".join(f"{name} {'ok' if passed else 'FAIL'} ({info})" for name, (passed, info) in checks.items())
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} | {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
