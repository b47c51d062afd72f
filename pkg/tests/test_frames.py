import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import special_ortho_group

from conftest import SCENARIOS, framed, scenario_curve
from flatstrip import surface as S
from flatstrip.errors import AsymptoticDirectionError, RefineGridError
from flatstrip.frames import (
    build_framed_curve,
    check_nonasymptotic,
    compute_tau,
    initial_frame,
    reparametrize_arclength,
    rotation_from_angles,
)

SQ2 = math.sqrt(2)


def test_arclength_identity_for_unit_speed_curve():
    tab = reparametrize_arclength(S.sphere(), S.make_curve(["t", "0"], 2 * math.pi), 64)
    np.testing.assert_allclose(tab.t, tab.s, atol=1e-13)


def test_arclength_linear_speed():
    tab = reparametrize_arclength(S.plane(), S.make_curve(["2*t", "0"], 1.0), 64)
    np.testing.assert_allclose(tab.t, tab.s / 2, atol=1e-14)
    assert tab.length == pytest.approx(2.0, abs=1e-14)


def test_arclength_against_trapezoid_oracle():
    surf, curve = S.plane(), S.make_curve(["2*cos(t)", "sin(t)"], 2 * math.pi)
    tab = reparametrize_arclength(surf, curve, 128)
    fine = np.linspace(0, 2 * math.pi, 2_000_001)
    speed = np.hypot(2 * np.sin(fine), np.cos(fine))
    cum = np.concatenate([[0], np.cumsum(0.5 * (speed[1:] + speed[:-1]) * np.diff(fine))])
    np.testing.assert_allclose(np.interp(tab.t, fine, cum), tab.s, atol=1e-8)
    # unit speed on the output grid, by central chords of the image curve
    fc = build_framed_curve(surf, curve, K=128)
    h = 1e-5
    s = np.clip(fc.s, h, fc.length - h)
    speed = np.linalg.norm(fc.local(s + h).position - fc.local(s - h).position, axis=-1) / (2 * h)
    np.testing.assert_allclose(speed, 1.0, atol=1e-8)


def test_initial_frame_examples():
    fs = initial_frame(S.sphere(), S.make_curve(["t", "0"], 6))
    np.testing.assert_allclose(fs.E, [[0, 1, 0], [0, 0, 1]], atol=1e-15)
    np.testing.assert_allclose(fs.W, [1, 0, 0], atol=1e-15)
    fs = initial_frame(S.plane(), S.make_curve(["3*t", "4*t"], 1))
    # x1 is the chart vector kept: (1, 0, 0) - 0.6 T normalized
    np.testing.assert_allclose(fs.E, [[0.6, 0.8, 0], [0.8, -0.6, 0]], atol=1e-15)
    np.testing.assert_allclose(fs.W, [0, 0, -1], atol=1e-15)
    fs = initial_frame(S.cylinder(), S.make_curve(["t", "t"], 6))
    np.testing.assert_allclose(fs.E, [[0, 1 / SQ2, 1 / SQ2], [0, -1 / SQ2, 1 / SQ2]], atol=1e-15)
    np.testing.assert_allclose(np.abs(fs.W), [1, 0, 0], atol=1e-15)


def test_frame_on_plane_is_constant():
    fc = build_framed_curve(S.plane(), S.make_curve(["t", "0.5*t"], 2.0), K=64)
    np.testing.assert_allclose(fc.E, np.broadcast_to(fc.E[0], fc.E.shape), atol=1e-15)
    np.testing.assert_array_equal(fc.tau, 0.0)


def test_equator_polar_direction_is_parallel():
    fc = framed("sphere-equator")
    np.testing.assert_allclose(fc.E[:, 1], np.broadcast_to([0, 0, 1], fc.E[:, 1].shape), atol=1e-12)
    np.testing.assert_allclose(np.abs(fc.tau[:, 0]), 1.0, atol=1e-13)
    np.testing.assert_allclose(fc.tau[:, 1], 0.0, atol=1e-13)


def test_latitude_tau():
    fc = framed("sphere-latitude")
    np.testing.assert_allclose(np.linalg.norm(fc.tau, axis=-1), 1.0, atol=1e-12)
    np.testing.assert_allclose(fc.tau[:, 0], fc.tau[0, 0], atol=1e-12)
    np.testing.assert_allclose(fc.tau[:, 1], 0.0, atol=1e-12)


@pytest.mark.parametrize("name", sorted(SCENARIOS))
def test_frame_invariants(name):
    fc = framed(name)
    assert fc.K >= 32
    assert fc.orthonormality_residual() <= 1e-10
    assert fc.parallelism_residual() <= 1e-8
    # every E_i is tangent to the surface and W is the positively oriented completion
    N = fc.normal
    assert np.max(np.abs(np.einsum("kia,ka->ki", fc.E, N))) <= 1e-10
    det = np.linalg.det(np.concatenate([fc.E, fc.W[:, None, :]], axis=1))
    np.testing.assert_allclose(det, 1.0, atol=1e-12)
    np.testing.assert_allclose(np.diff(fc.s), fc.step, atol=1e-12)


@pytest.mark.parametrize("name", ["ellipsoid-wave", "paraboloid-circle", "sphere-latitude"])
def test_tau_matches_finite_differences(name):
    fc = framed(name)
    h = 1e-4
    s = np.linspace(0.1, fc.length - 0.1, 25)
    ahead, behind, here = fc.local(s + h), fc.local(s - h), fc.local(s)
    dE = (ahead.E - behind.E) / (2 * h)
    tau_fd = np.einsum("kia,ka->ki", dE, here.W)
    np.testing.assert_allclose(tau_fd, here.tau, atol=1e-6)
    dW = (ahead.W - behind.W) / (2 * h)
    np.testing.assert_allclose(np.einsum("ka,kia->ki", dW, here.E), -here.tau, atol=1e-6)


def test_compute_tau_on_plane_is_zero():
    surf, curve = S.plane(), S.make_curve(["t", "t^2"], 1)
    fs = initial_frame(surf, curve, 0.3)
    np.testing.assert_array_equal(compute_tau(surf, curve, fs.E, 0.3), 0.0)


@settings(max_examples=5, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_frame_rotation_covariance(seed):
    surf, curve = S.sphere(m=3), S.make_curve(["t", "0.3*sin(t)", "0.2*cos(2*t)"], 2 * math.pi)
    Q = special_ortho_group.rvs(2, random_state=seed)
    base = build_framed_curve(surf, curve)
    rot = build_framed_curve(surf, curve, rotation=Q)
    np.testing.assert_allclose(rot.E[:, 1:], np.einsum("ij,kja->kia", Q, base.E[:, 1:]), atol=1e-8)
    np.testing.assert_allclose(rot.tau[:, 1:], base.tau[:, 1:] @ Q.T, atol=1e-8)
    np.testing.assert_allclose(rot.tau[:, 0], base.tau[:, 0], atol=1e-8)
    np.testing.assert_allclose(np.linalg.norm(rot.tau, axis=-1), np.linalg.norm(base.tau, axis=-1), atol=1e-8)


def test_rotation_from_angles():
    Q = rotation_from_angles([0.3, -1.1, 2.0], 4)
    np.testing.assert_allclose(Q @ Q.T, np.eye(3), atol=1e-15)
    assert np.linalg.det(Q) == pytest.approx(1.0)
    np.testing.assert_array_equal(rotation_from_angles([], 2), np.eye(1))
    with pytest.raises(ValueError):
        rotation_from_angles([0.1], 4)


def test_local_evaluation_matches_finer_grid():
    surf, curve = scenario_curve("ellipsoid-wave")
    coarse = build_framed_curve(surf, curve, K=512)
    fine = build_framed_curve(surf, curve, K=1024)
    mids = fine.s[1::2]
    loc = coarse.local(mids)
    np.testing.assert_allclose(loc.t, fine.t[1::2], atol=1e-12)
    np.testing.assert_allclose(loc.E, fine.E[1::2], atol=1e-9)
    np.testing.assert_allclose(loc.tau, fine.tau[1::2], atol=1e-9)
    nodes = coarse.local(coarse.s[::7])
    np.testing.assert_array_equal(nodes.E, coarse.E[::7])


def test_nonasymptotic_checks():
    assert check_nonasymptotic(framed("sphere-equator")) == pytest.approx(1.0)
    with pytest.raises(AsymptoticDirectionError) as info:
        check_nonasymptotic(build_framed_curve(S.cylinder(), S.make_curve(["0", "t"], 1.0), K=64))
    assert info.value.t == 0.0
    with pytest.raises(AsymptoticDirectionError) as info:
        check_nonasymptotic(build_framed_curve(S.plane(), S.make_curve(["t", "sin(t)"], 1.0), K=64))
    assert info.value.t == 0.0
    assert "never to be parallel to an asymptotic direction" in str(info.value)


def test_nonasymptotic_touch_between_nodes():
    fc = build_framed_curve(S.cylinder(), S.make_curve(["sin(t)", "t"], math.pi))
    with pytest.raises(AsymptoticDirectionError) as info:
        check_nonasymptotic(fc)
    assert info.value.t == pytest.approx(math.pi / 2, abs=1e-6)


def test_refinement_gives_up_at_limit():
    with pytest.raises(RefineGridError):
        build_framed_curve(*scenario_curve("ellipsoid-wave"), K=64, parallel_tol=1e-30, max_samples=128)
