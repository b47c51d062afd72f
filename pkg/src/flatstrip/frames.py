"""Adapted orthonormal frames along a curve on a hypersurface.

The first frame vector is the unit tangent; the remaining ones start from a
Gram-Schmidt basis of the chart tangent space and are carried along by
normal parallel transport (a Bishop frame), i.e. their covariant derivative
inside the surface only ever points along the tangent. The ambient frame is
completed by ``W = E_1 x ... x E_m`` and the coefficients
``tau_i = <dE_i/ds, W>`` couple the frame to the surface's bending.

Everything is computed with respect to arc length ``s`` on a uniform grid.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, fields

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from . import multicross
from ._grid import diff_stencil, interp4
from .errors import AsymptoticDirectionError, DegenerateCurveError, RefineGridError
from .surface import CurveOnSurface, Hypersurface, curve_jet

log = logging.getLogger(__name__)

DEFAULT_SAMPLES = 512
MAX_SAMPLES = 8192
MIN_SAMPLES = 32
PARALLEL_TOL = 1e-8
CORRECTION_LIMIT = 1e-3
_NEWTON_ITERS = 6


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


def speed_integral(S, c, a, b):
    """``int_a^b |d(f o c)/dt| dt`` by 8-point Gauss-Legendre, vectorized over endpoints."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    half = 0.5 * (b - a)
    pts = 0.5 * (a + b)[..., None] + half[..., None] * _GL_NODES
    return half * (curve_jet(S, c, pts, check=False).speed @ _GL_WEIGHTS)


@dataclass(frozen=True)
class ArcLengthTable:
    """Original parameters ``t[k]`` at uniformly spaced arc lengths ``s[k]``."""

    s: np.ndarray
    t: np.ndarray
    length: float

    @property
    def step(self):
        return self.length / (len(self.s) - 1)


def reparametrize_arclength(S: Hypersurface, c: CurveOnSurface, K: int = DEFAULT_SAMPLES) -> ArcLengthTable:
    """Tabulate ``t(s)`` on ``K + 1`` equally spaced arc lengths.

    Arc length is accumulated by composite Gauss-Legendre quadrature of the
    speed on a fine parameter grid, then inverted node by node with Newton's
    method (the speed is the exact derivative of ``s(t)``).
    """
    if K < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} grid intervals, got {K}")

    def speed(t):
        return curve_jet(S, c, t).speed

    def integral(a, b):
        return speed_integral(S, c, a, b)

    knots = np.linspace(0.0, c.alpha, 8 * K + 1)
    curve_jet(S, c, knots)  # regularity and chart containment on a fine probe
    cumulative = np.concatenate([[0.0], np.cumsum(integral(knots[:-1], knots[1:]))])
    length = float(cumulative[-1])
    s = np.linspace(0.0, length, K + 1)

    i = np.clip(np.searchsorted(cumulative, s, side="right") - 1, 0, len(knots) - 2)
    frac = (s - cumulative[i]) / (cumulative[i + 1] - cumulative[i])
    t = knots[i] + frac * (knots[i + 1] - knots[i])
    for _ in range(_NEWTON_ITERS):
        resid = cumulative[i] + integral(knots[i], t) - s
        t = np.clip(t - resid / speed(t), knots[i], knots[i + 1])
    resid = cumulative[i] + integral(knots[i], t) - s
    if np.max(np.abs(resid)) > 1e-10 * max(1.0, length):
        raise DegenerateCurveError(f"arc-length inversion did not converge (residual {np.max(np.abs(resid)):.2e})")
    t[0], t[-1] = 0.0, c.alpha
    if np.any(np.diff(t) <= 0):
        raise DegenerateCurveError("arc-length table is not monotone")
    return ArcLengthTable(s, t, length)


@dataclass(frozen=True)
class UnitSpeedJet:
    """Arc-length derivatives of the ambient curve plus surface data at a batch of t."""

    t: np.ndarray
    position: np.ndarray
    tangent: np.ndarray  # d gamma / ds
    curvature_vector: np.ndarray  # d2 gamma / ds2
    normal: np.ndarray  # unit normal of the surface
    jacobian: np.ndarray
    shape: np.ndarray  # chart matrix of h w.r.t. `normal`
    chart_tangent: np.ndarray  # dc/ds
    speed: np.ndarray  # |d gamma / dt|

    def chart_coords(self, V):
        """Chart coordinates of tangent vectors ``V`` (shape ``(..., k, m+1)``)."""
        J = self.jacobian
        G = np.swapaxes(J, -1, -2) @ J
        rhs = np.einsum("...ai,...ka->...ik", J, V)
        return np.swapaxes(np.linalg.solve(G, rhs), -1, -2)

    def take(self, idx):
        return UnitSpeedJet(*(getattr(self, f.name)[idx] for f in fields(self)))

    def h_with_tangent(self, V):
        """``h(dgamma/ds, V_k)`` for tangent vectors ``V`` of shape ``(..., k, m+1)``."""
        e = self.chart_coords(V)
        return np.einsum("...ij,...i,...kj->...k", self.shape, self.chart_tangent, e)


def unit_speed_jet(S, c, t):
    cj = curve_jet(S, c, t)
    v = cj.speed[..., None]
    T = cj.velocity / v
    a = cj.acceleration
    kvec = (a - np.sum(a * T, axis=-1, keepdims=True) * T) / (v * v)
    shape = np.einsum("...aij,...a->...ij", cj.hessian, cj.normal)
    return UnitSpeedJet(np.asarray(t, float), cj.position, T, kvec, cj.normal, cj.jacobian, shape, cj.chart_vel / v, cj.speed)


@dataclass(frozen=True)
class FrameSample:
    t: float
    E: np.ndarray  # (m, m+1), E[0] is the unit tangent
    W: np.ndarray  # E_1 x ... x E_m
    tau: np.ndarray  # (m,)


def _frame_derivative(E, kv, tau, W):
    T = E[..., 0, :]
    dE = np.empty_like(E)
    dE[..., 0, :] = kv
    coeff = np.einsum("...ja,...a->...j", E[..., 1:, :], kv)
    dE[..., 1:, :] = -coeff[..., None] * T[..., None, :] + tau[..., 1:, None] * W[..., None, :]
    return dE


def _complete(E):
    W = multicross.cross(E)
    return W / np.linalg.norm(W, axis=-1, keepdims=True)


def compute_tau(S, c, E, t):
    """``tau_i = <dE_i/ds, W>`` from the exact 2-jets of the chart and curve.

    Since ``E_i`` stays tangent, the normal part of its derivative is
    ``h(dgamma/ds, E_i) N``, so no differencing of the frame is needed.
    """
    uj = unit_speed_jet(S, c, t)
    W = _complete(E)
    orient = np.sum(W * uj.normal, axis=-1)
    return uj.h_with_tangent(E) * orient[..., None]


def _rotate_normal_part(E, rotation):
    if rotation is None:
        return E
    Q = np.asarray(rotation, dtype=float)
    m = E.shape[0]
    if Q.shape != (m - 1, m - 1):
        raise ValueError(f"frame rotation must be {(m - 1, m - 1)}, got {Q.shape}")
    if not np.allclose(Q @ Q.T, np.eye(m - 1), atol=1e-12):
        raise ValueError("frame rotation must be orthogonal")
    out = E.copy()
    out[1:] = Q @ E[1:]
    return out


def initial_frame(S, c, t0=0.0, rotation=None) -> FrameSample:
    """Gram-Schmidt adapted frame at ``t0``.

    The chart basis vector most parallel to the tangent is dropped; the rest
    are orthonormalized after the unit tangent. ``rotation`` (an orthogonal
    ``(m-1) x (m-1)`` matrix) mixes ``E_2..E_m`` afterwards.
    """
    uj = unit_speed_jet(S, c, t0)
    T = uj.tangent
    basis = np.swapaxes(uj.jacobian, -1, -2)
    cosines = np.abs(basis @ T) / np.linalg.norm(basis, axis=-1)
    drop = int(np.argmax(cosines))
    rest = np.delete(basis, drop, axis=0)
    E = multicross.orthonormalize(np.vstack([T[None, :], rest]))
    E = _rotate_normal_part(E, rotation)
    return FrameSample(float(t0), E, _complete(E), compute_tau(S, c, E, t0))


def rotation_from_angles(angles, m):
    """Product of plane rotations of ``E_2..E_m``, one angle per pair (i < j)."""
    k = m - 1
    pairs = [(i, j) for i in range(k) for j in range(i + 1, k)]
    angles = list(angles or [])
    if len(angles) not in (0, len(pairs)):
        raise ValueError(f"m={m} needs {len(pairs)} frame rotation angles, got {len(angles)}")
    Q = np.eye(k)
    for (i, j), a in zip(pairs, angles):
        G = np.eye(k)
        G[i, i] = G[j, j] = np.cos(a)
        G[i, j], G[j, i] = -np.sin(a), np.sin(a)
        Q = G @ Q
    return Q


@dataclass(frozen=True)
class LocalFrame:
    """Frame data at a batch of arbitrary arc lengths (see ``FramedCurve.local``)."""

    s: np.ndarray
    t: np.ndarray
    position: np.ndarray
    curvature_vector: np.ndarray
    normal: np.ndarray
    E: np.ndarray
    W: np.ndarray
    tau: np.ndarray

    @property
    def tangent(self):
        return self.E[:, 0]

    def frame_derivative(self):
        return _frame_derivative(self.E, self.curvature_vector, self.tau, self.W)


@dataclass(frozen=True)
class FramedCurve:
    """A Bishop-framed curve sampled at uniform arc length.

    Arrays are indexed by grid node first: ``E[k]`` is the ``(m, m+1)`` frame
    at arc length ``s[k]`` (original parameter ``t[k]``).
    """

    surface: Hypersurface
    curve: CurveOnSurface
    s: np.ndarray
    t: np.ndarray
    length: float
    position: np.ndarray
    curvature_vector: np.ndarray
    normal: np.ndarray
    E: np.ndarray
    W: np.ndarray
    tau: np.ndarray
    max_correction: float
    reparametrized_unit_speed: bool = True

    @property
    def m(self):
        return self.E.shape[1]

    @property
    def step(self):
        return self.length / (len(self.s) - 1)

    @property
    def K(self):
        return len(self.s) - 1

    @property
    def tangent(self):
        return self.E[:, 0]

    @property
    def is_closed(self):
        return bool(np.linalg.norm(self.position[0] - self.position[-1]) <= 1e-9 * max(1.0, self.length))

    def sample(self, k) -> FrameSample:
        return FrameSample(float(self.t[k]), self.E[k], self.W[k], self.tau[k])

    @property
    def samples(self):
        return [self.sample(k) for k in range(len(self.s))]

    def frame_derivative(self):
        """Exact ``dE_i/ds`` at the nodes implied by the transport equations."""
        return _frame_derivative(self.E, self.curvature_vector, self.tau, self.W)

    def local(self, s) -> "LocalFrame":
        """Frame data at arbitrary arc lengths ``s`` (1-d array).

        Grid nodes return the stored samples. Elsewhere ``t(s)`` is solved
        from the arc-length integral and the frame is carried from the
        nearest node by one RK4 step, so accuracy matches the grid itself.
        """
        s = np.atleast_1d(np.asarray(s, dtype=float))
        h = self.step
        k = np.clip(np.rint(s / h).astype(int), 0, self.K)
        on_node = np.abs(s - self.s[k]) <= 1e-12 * max(1.0, self.length)
        S, c = self.surface, self.curve
        t0 = self.t[k]
        t = interp4(0.0, h, self.t, s)
        for _ in range(4):
            resid = self.s[k] + speed_integral(S, c, t0, t) - s
            t = t - resid / curve_jet(S, c, t, check=False).speed
        t = np.where(on_node, self.t[k], t)
        end = unit_speed_jet(S, c, t)
        mid = unit_speed_jet(S, c, 0.5 * (t0 + t))
        start = unit_speed_jet(S, c, t0)
        Y = _rk4_step(start, mid, end, self.E[k, 1:], (t - t0)[:, None, None])
        E = _reorthonormalize(end.tangent, end.normal, Y)
        E[on_node] = self.E[k[on_node]]
        W = _complete(E)
        orient = np.sum(W * end.normal, axis=-1)
        tau = end.h_with_tangent(E) * orient[:, None]
        pos, T, kv = end.position, end.tangent, end.curvature_vector
        if np.any(on_node):
            kk = k[on_node]
            W[on_node], tau[on_node] = self.W[kk], self.tau[kk]
            pos[on_node], T[on_node] = self.position[kk], self.tangent[kk]
            kv[on_node] = self.curvature_vector[kk]
        return LocalFrame(s, t, pos, kv, end.normal, E, W, tau)

    def parallelism_residual(self):
        """``max |<dE_j/ds, E_k>|`` over ``j, k >= 2`` with ``dE/ds`` differenced on the grid."""
        if self.m < 2:
            return 0.0
        dE = diff_stencil(self.E[:, 1:], self.step, points=11)
        G = np.einsum("kja,kia->kji", dE, self.E[:, 1:])
        return float(np.max(np.abs(G)))

    def orthonormality_residual(self):
        n = self.E.shape[1]
        full = np.concatenate([self.E, self.W[:, None, :]], axis=1)
        G = full @ np.swapaxes(full, -1, -2)
        return float(np.max(np.abs(G - np.eye(n + 1))))


def _transport_rhs(uj, En):
    """d/dt of the normal frame vectors ``En`` (shape ``(..., m-1, m+1)``).

    Inside the surface the derivative only has a tangent component; the
    normal part is ``h(T, E_j) N``.
    """
    J = uj.jacobian
    G = np.swapaxes(J, -1, -2) @ J
    e = np.swapaxes(np.linalg.solve(G, np.swapaxes(J, -1, -2) @ np.swapaxes(En, -1, -2)), -1, -2)
    hn = np.einsum("...ki,...ij,...j->...k", e, uj.shape, uj.chart_tangent)
    along = np.einsum("...ka,...a->...k", En, uj.curvature_vector)
    dE = -along[..., None] * uj.tangent[..., None, :] + hn[..., None] * uj.normal[..., None, :]
    return uj.speed[..., None, None] * dE


def _rk4_step(j0, jm, j1, Y, h):
    k1 = _transport_rhs(j0, Y)
    k2 = _transport_rhs(jm, Y + 0.5 * h * k1)
    k3 = _transport_rhs(jm, Y + 0.5 * h * k2)
    k4 = _transport_rhs(j1, Y + h * k3)
    return Y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _reorthonormalize(T, N, Y):
    """Project ``Y`` off ``N`` and Gram-Schmidt it after ``T`` (batched, two passes)."""
    rows = [T]
    projected = Y - np.sum(Y * N[..., None, :], axis=-1, keepdims=True) * N[..., None, :]
    for j in range(Y.shape[-2]):
        r = projected[..., j, :]
        for _ in range(2):
            for q in rows:
                r = r - np.sum(r * q, axis=-1, keepdims=True) * q
        norm = np.linalg.norm(r, axis=-1, keepdims=True)
        if np.any(norm < 1e-8):
            raise RefineGridError("transported frame collapsed; refine the grid")
        rows.append(r / norm)
    return np.stack(rows, axis=-2)


def propagate_frame(S, c, initial: FrameSample, table: ArcLengthTable, correction_limit=CORRECTION_LIMIT):
    """Carry the initial frame along the grid by normal parallel transport.

    Classical RK4 in the original parameter, stepping between the arc-length
    nodes; after every step the unit tangent is recomputed exactly, the
    normal vectors are projected back onto the tangent space and the frame is
    re-orthonormalized.
    """
    t = table.t
    if abs(initial.t - t[0]) > 1e-14:
        raise ValueError("initial frame must sit at the start of the grid")
    nodes = unit_speed_jet(S, c, t)
    mids = unit_speed_jet(S, c, 0.5 * (t[:-1] + t[1:]))
    K = len(t) - 1
    m = initial.E.shape[0]
    E = np.empty((K + 1, m, S.ambient_dim))
    E[0] = initial.E
    worst = 0.0
    for k in range(K):
        h = t[k + 1] - t[k]
        Y = _rk4_step(nodes.take(k), mids.take(k), nodes.take(k + 1), E[k, 1:], h)
        frame = _reorthonormalize(nodes.tangent[k + 1], nodes.normal[k + 1], Y)
        correction = float(np.max(np.abs(frame[1:] - Y)))
        if correction > correction_limit:
            raise RefineGridError(
                f"frame re-orthonormalization moved a vector by {correction:.2e} at t={t[k + 1]:.6g}; refine the grid"
            )
        worst = max(worst, correction)
        E[k + 1] = frame
    W = _complete(E)
    orient = np.sum(W * nodes.normal, axis=-1)
    tau = nodes.h_with_tangent(E) * orient[:, None]
    return FramedCurve(
        surface=S,
        curve=c,
        s=table.s,
        t=table.t,
        length=table.length,
        position=nodes.position,
        curvature_vector=nodes.curvature_vector,
        normal=nodes.normal,
        E=E,
        W=W,
        tau=tau,
        max_correction=worst,
    )


def build_framed_curve(
    S,
    c,
    K=DEFAULT_SAMPLES,
    rotation=None,
    refine=True,
    parallel_tol=PARALLEL_TOL,
    max_samples=MAX_SAMPLES,
) -> FramedCurve:
    """Arc-length grid + initial frame + transport, doubling K if needed."""
    while True:
        table = reparametrize_arclength(S, c, K)
        start = initial_frame(S, c, 0.0, rotation)
        try:
            fc = propagate_frame(S, c, start, table)
        except RefineGridError:
            if not refine or 2 * K > max_samples:
                raise
            K *= 2
            continue
        if not refine:
            return fc
        res = fc.parallelism_residual()
        if res <= parallel_tol:
            return fc
        if 2 * K > max_samples:
            raise RefineGridError(f"parallelism residual {res:.2e} still above {parallel_tol:.1e} at K={K}")
        log.info("parallelism residual %.2e at K=%d, refining", res, K)
        K *= 2


def normal_curvature(S, c, t):
    """``h(T, T)`` along the curve; equal to ``tau_1`` up to the sign of the normal."""
    uj = unit_speed_jet(S, c, t)
    return np.sum(uj.curvature_vector * uj.normal, axis=-1)


def _first_touch(fc: FramedCurve, tau1, threshold, scale):
    """Earliest ``t`` between nodes where the normal curvature vanishes or dips below ``threshold``."""
    S, c, t = fc.surface, fc.curve, fc.t
    kn = lambda x: float(normal_curvature(S, c, x))  # noqa: E731
    hits = []
    flip = np.nonzero(np.sign(tau1[:-1]) * np.sign(tau1[1:]) < 0)[0]
    for k in flip:
        hits.append(brentq(kn, t[k], t[k + 1], xtol=1e-14))
    a = np.abs(tau1)
    # small interior local minima may hide a tangential zero between nodes
    dip = np.nonzero((a[1:-1] <= a[:-2]) & (a[1:-1] <= a[2:]) & (a[1:-1] < 1e-2 * scale))[0] + 1
    for k in dip:
        res = minimize_scalar(lambda x: abs(kn(x)), bounds=(t[k - 1], t[k + 1]), method="bounded",
                              options={"xatol": 1e-13})
        if res.fun < threshold:
            hits.append(float(res.x))
    return min(hits) if hits else None


def check_nonasymptotic(fc: FramedCurve, tol=1e-8, abs_floor=1e-12):
    """Raise AsymptoticDirectionError where ``|tau_1|`` falls below the floor.

    The floor is ``max(tol * max_t |tau(t)|, abs_floor)``; the absolute part
    catches surfaces (planes) on which every ``tau`` vanishes identically.
    Grid nodes are tested first, then sign changes and small local minima of
    the normal curvature are refined between nodes so that a tangential
    touch is not missed.
    """
    tau1 = fc.tau[:, 0]
    scale = float(np.max(np.linalg.norm(fc.tau, axis=-1)))
    threshold = max(tol * scale, abs_floor)
    bad = np.nonzero(np.abs(tau1) < threshold)[0]
    first = float(fc.t[bad[0]]) if bad.size else None
    touch = _first_touch(fc, tau1, threshold, scale) if scale > abs_floor else None
    if touch is not None and (first is None or touch < first):
        first = touch
    if first is not None:
        s = float(np.interp(first, fc.t, fc.s))
        raise AsymptoticDirectionError(first, s, float(normal_curvature(fc.surface, fc.curve, first)), threshold)
    return float(np.min(np.abs(tau1)))
