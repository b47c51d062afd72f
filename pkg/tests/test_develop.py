import math

import numpy as np
import pytest

from conftest import patch
from flatstrip import surface as S
from flatstrip.develop import (
    collinearity,
    develop_patch,
    edge_length_errors,
    geodesic_curvature,
    ruling_angle,
    ruling_collinearity,
    total_geodesic_curvature,
)
from flatstrip.errors import UnsupportedDimensionError
from flatstrip.flatapprox import build_patch
from flatstrip.frames import build_framed_curve

TWO_PI = 2 * math.pi
CONE = ["x2*cos(x1)", "x2*sin(x1)", "x2"]

_strips = {}


def strip(name):
    if name not in _strips:
        _strips[name] = develop_patch(patch(name))
    return _strips[name]


def circle_fit(P):
    """Centre and radius of the least-squares circle through planar points."""
    A = np.column_stack([2 * P, np.ones(len(P))])
    b = np.sum(P * P, axis=1)
    (cx, cy, c), *_ = np.linalg.lstsq(A, b, rcond=None)
    centre = np.array([cx, cy])
    return centre, math.sqrt(c + centre @ centre)


def test_tangent_cylinder_develops_to_straight_band():
    st = strip("sphere-equator")
    np.testing.assert_allclose(st.kappa, 0.0, atol=1e-12)
    np.testing.assert_allclose(st.position[:, 1], 0.0, atol=1e-12)
    np.testing.assert_allclose(st.position[:, 0], st.s, atol=1e-12)
    np.testing.assert_allclose(np.abs(st.angle), math.pi / 2, atol=1e-12)
    assert collinearity(st.position) <= 1e-12


def test_helix_on_cylinder_unrolls_to_line():
    r = 0.7
    p = build_patch(build_framed_curve(S.cylinder(r), S.make_curve(["t", "t"], TWO_PI)))
    st = develop_patch(p)
    assert collinearity(st.position) <= 1e-10
    # rulings keep the helix angle to the axis (up to the sign of the ruling)
    helix = math.atan2(r, 1.0)
    a = np.abs(st.angle)
    np.testing.assert_allclose(np.minimum(a, math.pi - a), helix, atol=1e-10)


def test_tangent_cone_develops_to_circular_sector():
    st = strip("sphere-latitude")
    rho = 1.0  # slant distance from the latitude circle to the cone apex
    np.testing.assert_allclose(np.abs(st.kappa), 1 / rho, atol=1e-12)
    assert abs(st.turning) == pytest.approx(st.s[-1] / rho, abs=1e-9)
    centre, radius = circle_fit(st.position)
    assert radius == pytest.approx(rho, abs=1e-9)
    np.testing.assert_allclose(np.linalg.norm(st.position - centre, axis=-1), rho, atol=1e-9)
    # each developed ruling passes through the developed apex
    rel = centre - st.position
    r = st.ruling
    assert np.max(np.abs(rel[:, 0] * r[:, 1] - rel[:, 1] * r[:, 0])) <= 1e-9


def test_cone_geodesic_curvature_is_inverse_slant():
    height = 1.5
    cone = S.parametric(CONE)
    p = build_patch(build_framed_curve(cone, S.make_curve(["t", str(height)], TWO_PI)))
    slant = height * math.sqrt(2)
    s = np.linspace(0, p.length, 50)
    np.testing.assert_allclose(np.abs(geodesic_curvature(p, s)), 1 / slant, atol=1e-10)
    st = develop_patch(p)
    assert abs(st.turning) == pytest.approx(TWO_PI * height / slant, abs=1e-9)


@pytest.mark.parametrize("name", ["ellipsoid-wave", "paraboloid-circle", "sphere-latitude"])
def test_turning_matches_integrated_geodesic_curvature(name):
    st = strip(name)
    assert st.turning == pytest.approx(total_geodesic_curvature(st.patch), abs=1e-8)


def test_local_matches_nodes_and_is_continuous():
    st = strip("ellipsoid-wave")
    pos, th, ang = st.local(st.s[::9])
    np.testing.assert_array_equal(pos, st.position[::9])
    np.testing.assert_array_equal(th, st.heading[::9])
    k = 100
    h = 1e-9
    a, b = st.local(np.array([st.s[k] + 0.5 * st.s[1] - h, st.s[k] + 0.5 * st.s[1] + h]))[:2]
    assert np.linalg.norm(a[0] - a[1]) <= 1e-8
    np.testing.assert_allclose(ruling_angle(st.patch, st.s[::9]), st.angle[::9], atol=1e-15)


@pytest.mark.parametrize("name", ["sphere-equator", "sphere-latitude", "ellipsoid-wave", "paraboloid-circle"])
def test_development_preserves_edge_lengths(name):
    curve_err, chord_err = edge_length_errors(strip(name), ns=96, nu=24, subdivisions=32)
    assert np.max(curve_err) <= 1e-6
    # chords are only second-order accurate, so they get a looser sanity bound
    assert np.max(chord_err) <= 1e-3


@pytest.mark.parametrize("name", ["sphere-equator", "sphere-latitude", "ellipsoid-wave", "paraboloid-circle"])
def test_plane_curve_unit_speed_and_straight_rulings(name):
    st = strip(name)
    h = 1e-5
    s = np.clip(st.s, h, st.s[-1] - h)
    speed = np.linalg.norm(st.local(s + h)[0] - st.local(s - h)[0], axis=-1) / (2 * h)
    np.testing.assert_allclose(speed, 1.0, atol=1e-8)
    assert ruling_collinearity(st) <= 1e-10


def test_point_on_developed_ruling():
    st = strip("paraboloid-circle")
    s = np.linspace(0, st.s[-1], 7)
    v = st.half_width
    P = st.point(s, np.full_like(s, v))
    Q = st.point(s, np.full_like(s, -v))
    np.testing.assert_allclose(np.linalg.norm(P - Q, axis=-1), 2 * v, atol=1e-12)
    np.testing.assert_allclose(0.5 * (P + Q), st.local(s)[0], atol=1e-12)


def test_development_needs_surface_in_r3():
    with pytest.raises(UnsupportedDimensionError):
        develop_patch(patch("s3-great-circle"))
    with pytest.raises(UnsupportedDimensionError):
        geodesic_curvature(patch("s3-great-circle"), [0.1])
