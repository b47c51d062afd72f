import math

import numpy as np
import pytest

from flatstrip import surface as S
from flatstrip.errors import DegenerateChartError, DegenerateCurveError, InputError

BUILTINS = {
    "plane": S.plane(),
    "sphere": S.sphere(1.3),
    "sphere3": S.sphere(1.0, m=3),
    "cylinder": S.cylinder(0.7),
    "ellipsoid": S.ellipsoid((1, 1.5, 2)),
    "torus": S.torus(2, 0.5),
    "graph": S.graph("x1^2 - 0.5*x1*x2 + sin(x2)"),
}


def random_points(surf, rng, n=500):
    lo = np.maximum(surf.lower, -1.2)
    hi = np.minimum(surf.upper, 1.2)
    return rng.uniform(lo, hi, (n, surf.dim))


def test_tangent_basis_examples():
    np.testing.assert_allclose(S.tangent_basis(S.plane(), [0.3, -2]), np.eye(3)[:2])
    np.testing.assert_allclose(S.tangent_basis(S.sphere(), [0, 0]), [[0, 1, 0], [0, 0, 1]], atol=1e-15)
    np.testing.assert_allclose(S.tangent_basis(S.cylinder(), [0, 0]), [[0, 1, 0], [0, 0, 1]], atol=1e-15)


def test_unit_normal_examples(rng):
    np.testing.assert_allclose(S.unit_normal(S.plane(), [1, 2]), [0, 0, 1])
    p = random_points(S.sphere(), rng, 20)
    q = S.sphere()(p)
    np.testing.assert_allclose(S.unit_normal(S.sphere(), p), q, atol=1e-14)  # outward
    th = rng.uniform(-3, 3, 10)
    N = S.unit_normal(S.cylinder(), np.column_stack([th, rng.uniform(-1, 1, 10)]))
    np.testing.assert_allclose(N, np.column_stack([np.cos(th), np.sin(th), 0 * th]), atol=1e-14)


@pytest.mark.parametrize("name", sorted(BUILTINS))
def test_normal_is_unit_and_orthogonal(name, rng):
    surf = BUILTINS[name]
    p = random_points(surf, rng)
    N = S.unit_normal(surf, p)
    B = S.tangent_basis(surf, p)
    np.testing.assert_allclose(np.linalg.norm(N, axis=-1), 1.0, atol=1e-14)
    assert np.max(np.abs(np.einsum("kia,ka->ki", B, N))) <= 1e-12


def test_second_fundamental_form_examples():
    a = np.array([0.6, 0.8])
    assert S.second_fundamental_form(S.plane(), [0.1, 0.2], a, [1, -1]) == 0.0
    # unit sphere at the equator: chart basis is orthonormal there
    assert S.second_fundamental_form(S.sphere(), [0.4, 0.0], a, a) == pytest.approx(-1.0)
    r = 0.7
    cyl = S.cylinder(r)
    circ = np.array([1.0 / r, 0.0])  # unit-speed circular direction in the chart
    assert abs(S.second_fundamental_form(cyl, [0.3, 0], circ, circ)) == pytest.approx(1 / r)
    assert S.second_fundamental_form(cyl, [0.3, 0], [0, 1], [0, 1]) == 0.0


@pytest.mark.parametrize("name", sorted(BUILTINS))
def test_second_fundamental_form_symmetric_exactly(name, rng):
    surf = BUILTINS[name]
    p = random_points(surf, rng, 50)
    a, b = rng.standard_normal((2, 50, surf.dim))
    np.testing.assert_array_equal(S.second_fundamental_form(surf, p, a, b), S.second_fundamental_form(surf, p, b, a))


@pytest.mark.parametrize("name", ["sphere", "cylinder", "ellipsoid", "torus", "graph", "sphere3"])
def test_weingarten_consistency(name, rng):
    surf = BUILTINS[name]
    p = random_points(surf, rng, 30)
    a, b = rng.standard_normal((2, 30, surf.dim))
    h = 1e-5
    dN = (S.unit_normal(surf, p + h * a) - S.unit_normal(surf, p - h * a)) / (2 * h)
    _, J, _ = surf.jet(p)
    df_b = np.einsum("kai,ki->ka", J, b)
    expect = -np.sum(dN * df_b, axis=-1)
    np.testing.assert_allclose(S.second_fundamental_form(surf, p, a, b), expect, rtol=1e-6, atol=1e-6)


def test_graph_hessian_at_critical_point():
    for m in (2, 3):
        surf = S.graph(" + ".join(f"x{i + 1}^2" for i in range(m)), m=m)
        H = S.shape_matrix(surf, np.zeros(m))
        np.testing.assert_allclose(np.abs(H), 2 * np.eye(m))


def test_ambient_curve_examples():
    pos, vel, acc = S.ambient_curve(S.plane(), S.make_curve(["t", "0"], 1), 0.3)
    np.testing.assert_allclose(pos, [0.3, 0, 0])
    np.testing.assert_allclose(vel, [1, 0, 0])
    np.testing.assert_allclose(acc, [0, 0, 0])
    t = 0.7
    pos, vel, acc = S.ambient_curve(S.sphere(), S.make_curve(["t", "0"], 6), t)
    np.testing.assert_allclose(pos, [math.cos(t), math.sin(t), 0], atol=1e-15)
    np.testing.assert_allclose(vel, [-math.sin(t), math.cos(t), 0], atol=1e-15)
    np.testing.assert_allclose(acc, [-math.cos(t), -math.sin(t), 0], atol=1e-15)
    _, vel, _ = S.ambient_curve(S.cylinder(), S.make_curve(["t", "t"], 6), t)
    np.testing.assert_allclose(vel, [-math.sin(t), math.cos(t), 1], atol=1e-15)


def test_degenerate_chart_and_curve():
    cone = S.parametric(["x2*cos(x1)", "x2*sin(x1)", "x2"])
    with pytest.raises(DegenerateChartError):
        S.unit_normal(cone, [0.2, 0.0])
    with pytest.raises(DegenerateCurveError) as info:
        S.curve_jet(S.plane(), S.make_curve(["t^2", "0"], 1), np.array([0.5, 0.0]))
    assert info.value.t == 0.0
    with pytest.raises(DegenerateCurveError):
        S.curve_jet(S.sphere(), S.make_curve(["0", "t"], 3), np.linspace(0, 3, 5))  # leaves the chart


def test_dimension_checks():
    with pytest.raises(InputError):
        S.curve_jet(S.sphere(), S.make_curve(["t"], 1), 0.1)
    with pytest.raises(InputError):
        S.parametric(["x1"])
