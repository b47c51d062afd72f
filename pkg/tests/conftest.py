import math

import numpy as np
import pytest

from flatstrip import surface as S
from flatstrip.flatapprox import build_patch
from flatstrip.frames import build_framed_curve

TWO_PI = 2 * math.pi
PHI = math.pi / 4

SCENARIOS = {
    "sphere-equator": (lambda: S.sphere(), ["t", "0"], TWO_PI),
    "sphere-latitude": (lambda: S.sphere(), ["t", "pi/4"], TWO_PI),
    "ellipsoid-wave": (lambda: S.ellipsoid((1, 1, 2)), ["t", "0.3*sin(2*t)"], TWO_PI),
    "paraboloid-circle": (lambda: S.graph("x1^2 + x2^2"), ["0.5*cos(t)", "0.5*sin(t)"], TWO_PI),
    "s3-great-circle": (lambda: S.sphere(m=3), ["t", "0", "0"], TWO_PI),
}
SURFACE_SCENARIOS = [k for k in SCENARIOS if not k.startswith("s3")]

_cache = {}


def scenario_curve(name):
    make, coords, alpha = SCENARIOS[name]
    return make(), S.make_curve(coords, alpha)


def framed(name):
    key = ("framed", name)
    if key not in _cache:
        _cache[key] = build_framed_curve(*scenario_curve(name))
    return _cache[key]


def patch(name):
    key = ("patch", name)
    if key not in _cache:
        _cache[key] = build_patch(framed(name))
    return _cache[key]


def t_to_s(fc, t):
    return np.interp(t, fc.t, fc.s)


# acceptance lines collected for the terminal summary
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
