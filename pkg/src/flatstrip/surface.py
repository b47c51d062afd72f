"""Hypersurfaces given by a single chart, and curves drawn in chart coordinates.

A :class:`Hypersurface` is a map ``f: U -> R^{m+1}`` with ``U`` a box in
``R^m``; every coordinate of ``f`` is an :class:`~flatstrip.exprsurf.Expression`
in the chart variables ``x1..xm``, so values, Jacobians and second
derivatives come out of the same exact 2-jet evaluation. The builtin
surfaces are thin factories over that representation.

The unit normal is the normalized cross product of the Jacobian columns, and
the scalar second fundamental form is taken with respect to it:
``h(a, b) = <d2f(a, b), N>``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import multicross
from .errors import DegenerateChartError, DegenerateCurveError, InputError
from .exprsurf import Expression, eval_jet2, parse_expression

IMMERSION_TOL = 1e-16


def chart_variables(m):
    return tuple(f"x{i + 1}" for i in range(m))


@dataclass(frozen=True)
class Hypersurface:
    """An immersed chart ``f: U -> R^{m+1}``."""

    coords: tuple  # m + 1 Expressions in x1..xm
    lower: tuple
    upper: tuple
    name: str = "parametric"
    params: tuple = ()
    immersion_tol: float = IMMERSION_TOL

    def __post_init__(self):
        m = self.dim
        if m < 2:
            raise InputError("hypersurfaces must have dimension m >= 2")
        if len(self.coords) != m + 1:
            raise InputError(f"an m={m} chart needs {m + 1} coordinate expressions, got {len(self.coords)}")
        if len(self.lower) != m or len(self.upper) != m:
            raise InputError("chart domain box must have one interval per chart variable")
        for e in self.coords:
            if tuple(e.variables) != chart_variables(m):
                raise InputError(f"chart expressions must be declared over {chart_variables(m)}")

    @property
    def dim(self):
        return len(self.coords) - 1

    @property
    def ambient_dim(self):
        return self.dim + 1

    def contains(self, p):
        p = np.asarray(p, dtype=float)
        lo, hi = np.asarray(self.lower), np.asarray(self.upper)
        return np.all((p >= lo) & (p <= hi), axis=-1)

    def jet(self, p):
        """Return ``(f, J, H)`` at chart points ``p`` of shape ``(..., m)``.

        ``f`` has shape ``(..., m+1)``, ``J[..., a, i] = d f^a / d x_i`` and
        ``H[..., a, i, j] = d2 f^a / d x_i d x_j``.
        """
        p = np.asarray(p, dtype=float)
        coords = [p[..., i] for i in range(self.dim)]
        jets = [eval_jet2(e, coords) for e in self.coords]
        f = np.stack([j.value for j in jets], axis=-1)
        J = np.stack([j.grad for j in jets], axis=-2)
        H = np.stack([j.hess for j in jets], axis=-3)
        return f, J, H

    def __call__(self, p):
        return self.jet(p)[0]


def _check_immersion(J, tol):
    basis = np.swapaxes(J, -1, -2)
    g = multicross.gram_det(basis)
    if np.any(~(g >= tol)):
        raise DegenerateChartError(f"chart is not an immersion here (Gram determinant {np.min(g):.3e} < {tol:.1e})")
    return basis


def tangent_basis(S: Hypersurface, p):
    """Jacobian columns ``df/dx_i`` as rows of an ``(..., m, m+1)`` array."""
    _, J, _ = S.jet(p)
    return _check_immersion(J, S.immersion_tol)


def normal_from_jacobian(J, tol=IMMERSION_TOL):
    basis = _check_immersion(J, tol)
    return multicross.normalize(multicross.cross(basis))


def unit_normal(S: Hypersurface, p):
    """Positively oriented unit normal ``cross(df/dx_1, ..., df/dx_m) / |.|``."""
    return multicross.normalize(multicross.cross(tangent_basis(S, p)))


def second_fundamental_form(S: Hypersurface, p, a, b):
    """Scalar second fundamental form of chart vectors ``a`` and ``b`` at ``p``."""
    _, J, H = S.jet(p)
    N = normal_from_jacobian(J, S.immersion_tol)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    hN = np.einsum("...aij,...a->...ij", H, N)
    # symmetric assembly so that h(a, b) == h(b, a) bit for bit
    return 0.5 * (np.einsum("...ij,...i,...j->...", hN, a, b) + np.einsum("...ij,...i,...j->...", hN, b, a))


def shape_matrix(S: Hypersurface, p):
    """Matrix of ``h`` in the chart basis at ``p``."""
    _, J, H = S.jet(p)
    N = normal_from_jacobian(J, S.immersion_tol)
    return np.einsum("...aij,...a->...ij", H, N)


# --------------------------------------------------------------------------
# curves


@dataclass(frozen=True)
class CurveOnSurface:
    """Chart coordinates ``c(t)`` for ``t`` in ``[0, alpha]``."""

    coords: tuple  # m Expressions in t
    alpha: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise InputError("curve interval [0, alpha] needs alpha > 0")
        for e in self.coords:
            if tuple(e.variables) != ("t",):
                raise InputError("curve expressions must be declared over the single variable 't'")

    @property
    def dim(self):
        return len(self.coords)

    def jet(self, t):
        """``(c, c', c'')`` each of shape ``t.shape + (m,)``."""
        t = np.asarray(t, dtype=float)
        jets = [eval_jet2(e, [t]) for e in self.coords]
        c = np.stack([j.value for j in jets], axis=-1)
        d1 = np.stack([j.grad[..., 0] for j in jets], axis=-1)
        d2 = np.stack([j.hess[..., 0, 0] for j in jets], axis=-1)
        return c, d1, d2


def make_curve(texts, alpha):
    return CurveOnSurface(tuple(parse_expression(s, ["t"]) for s in texts), float(alpha))


@dataclass(frozen=True)
class CurveJet:
    """Everything known about the ambient curve at a batch of parameters."""

    t: np.ndarray
    chart: np.ndarray  # c
    chart_vel: np.ndarray  # c'
    position: np.ndarray
    velocity: np.ndarray
    acceleration: np.ndarray
    jacobian: np.ndarray
    hessian: np.ndarray
    normal: np.ndarray

    @property
    def speed(self):
        return np.linalg.norm(self.velocity, axis=-1)


def curve_jet(S: Hypersurface, c: CurveOnSurface, t, check=True) -> CurveJet:
    if c.dim != S.dim:
        raise InputError(f"curve has {c.dim} chart components but the surface has dimension {S.dim}")
    t = np.asarray(t, dtype=float)
    x, dx, ddx = c.jet(t)
    if check and not np.all(S.contains(x)):
        bad = np.atleast_1d(t)[~np.atleast_1d(S.contains(x))][0]
        raise DegenerateCurveError(f"curve leaves the chart domain at t={bad:.12g}", t=float(bad))
    f, J, H = S.jet(x)
    vel = np.einsum("...ai,...i->...a", J, dx)
    acc = np.einsum("...ai,...i->...a", J, ddx) + np.einsum("...aij,...i,...j->...a", H, dx, dx)
    speed = np.linalg.norm(vel, axis=-1)
    if check and np.any(~(speed > 0)):
        bad = np.atleast_1d(t)[~np.atleast_1d(speed > 0)][0]
        raise DegenerateCurveError(f"curve is not regular at t={bad:.12g}", t=float(bad))
    N = normal_from_jacobian(J, S.immersion_tol)
    return CurveJet(t, x, dx, f, vel, acc, J, H, N)


def ambient_curve(S: Hypersurface, c: CurveOnSurface, t):
    """Position, velocity and acceleration of ``f(c(t))`` in ``R^{m+1}``."""
    cj = curve_jet(S, c, t)
    return cj.position, cj.velocity, cj.acceleration


# --------------------------------------------------------------------------
# builtins


def _num(x):
    return repr(float(x))


def parametric(texts, lower=None, upper=None, name="parametric", params=()):
    m = len(texts) - 1
    vars_ = chart_variables(m)
    coords = tuple(parse_expression(s, vars_) for s in texts)
    lower = tuple(float(v) for v in (lower if lower is not None else [-1e6] * m))
    upper = tuple(float(v) for v in (upper if upper is not None else [1e6] * m))
    return Hypersurface(coords, lower, upper, name=name, params=tuple(params))


def plane(m=2):
    """The coordinate hyperplane ``x_{m+1} = 0``."""
    texts = [f"x{i + 1}" for i in range(m)] + ["0"]
    return parametric(texts, name="plane", params=(m,))


def sphere(radius=1.0, m=2):
    """Round sphere in hyperspherical coordinates.

    ``x1`` is the azimuth and ``x2..xm`` latitudes; for ``m = 2`` this is
    ``(R cos x1 cos x2, R sin x1 cos x2, R sin x2)`` whose normal points
    outward.
    """
    R = _num(radius)
    vars_ = chart_variables(m)
    texts = []
    for k in range(m + 1):
        if k == 0:
            head = f"cos({vars_[0]})"
            rest = vars_[1:]
        elif k == 1:
            head = f"sin({vars_[0]})"
            rest = vars_[1:]
        else:
            head = f"sin({vars_[k - 1]})"
            rest = vars_[k:]
        factors = [R, head] + [f"cos({v})" for v in rest]
        texts.append("*".join(factors))
    half = math.pi / 2 - 1e-9
    lower = [-4 * math.pi] + [-half] * (m - 1)
    upper = [4 * math.pi] + [half] * (m - 1)
    return parametric(texts, lower, upper, name="sphere", params=(float(radius), m))


def cylinder(radius=1.0):
    r = _num(radius)
    return parametric(
        [f"{r}*cos(x1)", f"{r}*sin(x1)", "x2"],
        [-4 * math.pi, -1e6],
        [4 * math.pi, 1e6],
        name="cylinder",
        params=(float(radius),),
    )


def ellipsoid(axes=(1.0, 1.0, 1.0)):
    a, b, c = (_num(v) for v in axes)
    half = math.pi / 2 - 1e-9
    return parametric(
        [f"{a}*cos(x1)*cos(x2)", f"{b}*sin(x1)*cos(x2)", f"{c}*sin(x2)"],
        [-4 * math.pi, -half],
        [4 * math.pi, half],
        name="ellipsoid",
        params=tuple(float(v) for v in axes),
    )


def torus(major=2.0, minor=1.0):
    R, r = _num(major), _num(minor)
    return parametric(
        [f"({R} + {r}*cos(x2))*cos(x1)", f"({R} + {r}*cos(x2))*sin(x1)", f"{r}*sin(x2)"],
        [-4 * math.pi, -4 * math.pi],
        [4 * math.pi, 4 * math.pi],
        name="torus",
        params=(float(major), float(minor)),
    )


def graph(height, m=2, lower=None, upper=None):
    """Graph ``(x1, ..., xm, u(x))`` of a height expression."""
    texts = [f"x{i + 1}" for i in range(m)] + [height]
    return parametric(texts, lower, upper, name="graph", params=(height, m))


BUILTINS = {
    "plane": plane,
    "sphere": sphere,
    "cylinder": cylinder,
    "ellipsoid": ellipsoid,
    "torus": torus,
    "graph": graph,
}
