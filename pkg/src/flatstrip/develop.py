"""Planar development of a flat strip in R^3.

A developable patch is locally isometric to the plane, so it can be unrolled.
The curve goes to the plane curve whose signed curvature equals the geodesic
curvature of the curve inside the patch. Each ruling goes to the straight line
that makes the same angle with the tangent that it makes on the patch. The
development is pinned at ``s = 0`` to the origin with heading ``(1, 0)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import multicross
from .errors import UnsupportedDimensionError
from .flatapprox import RuledPatch

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


def _require_surface_case(patch: RuledPatch):
    if patch.m != 2:
        raise UnsupportedDimensionError(f"planar development needs m = 2, got m = {patch.m}")


def _strip_frame(sec):
    """Unit patch normal on the curve, and the in-patch unit normal of the curve."""
    X = sec.X[..., 0, :]
    n = multicross.normalize(multicross.cross(np.stack([sec.tangent, X], axis=-2)))
    side = multicross.cross(np.stack([n, sec.tangent], axis=-2))
    return n, side


def geodesic_curvature(patch: RuledPatch, s):
    """Signed geodesic curvature of the curve inside the patch at arc lengths ``s``.

    Positive when the curve turns towards ``N x T``, with ``N`` the unit patch
    normal along the curve.
    """
    _require_surface_case(patch)
    sec = patch.local(patch._check(s, None)[0])
    _, side = _strip_frame(sec)
    return np.sum(sec.curvature_vector * side, axis=-1)


def ruling_angle(patch: RuledPatch, s):
    """Signed angle from the tangent to the ruling, measured around the patch normal."""
    _require_surface_case(patch)
    sec = patch.local(patch._check(s, None)[0])
    n, side = _strip_frame(sec)
    X = sec.X[..., 0, :]
    return np.arctan2(np.sum(X * side, axis=-1), np.sum(X * sec.tangent, axis=-1))


def _kappa_angle(patch, s):
    sec = patch.local(s)
    n, side = _strip_frame(sec)
    X = sec.X[..., 0, :]
    kappa = np.sum(sec.curvature_vector * side, axis=-1)
    angle = np.arctan2(np.sum(X * side, axis=-1), np.sum(X * sec.tangent, axis=-1))
    return kappa, angle


def _rk4(state, k0, km, k1, h):
    """One classical RK4 step of ``(x, y, theta)' = (cos theta, sin theta, kappa)``."""

    def f(st, k):
        return np.stack([np.cos(st[..., 2]), np.sin(st[..., 2]), k], axis=-1)

    a = f(state, k0)
    b = f(state + 0.5 * h[..., None] * a, km)
    c = f(state + 0.5 * h[..., None] * b, km)
    d = f(state + h[..., None] * c, k1)
    return state + h[..., None] / 6.0 * (a + 2 * b + 2 * c + d)


@dataclass(frozen=True)
class PlanarStrip:
    """Development of an m = 2 patch: plane curve, plane rulings, half-width."""

    patch: RuledPatch
    s: np.ndarray
    position: np.ndarray  # (K+1, 2)
    heading: np.ndarray  # tangent angle theta(s)
    kappa: np.ndarray  # geodesic curvature at the nodes
    angle: np.ndarray  # ruling angle relative to the tangent
    half_width: float

    @property
    def tangent(self):
        return np.stack([np.cos(self.heading), np.sin(self.heading)], axis=-1)

    @property
    def ruling(self):
        a = self.heading + self.angle
        return np.stack([np.cos(a), np.sin(a)], axis=-1)

    @property
    def turning(self):
        return float(self.heading[-1] - self.heading[0])

    def local(self, s):
        """Plane position, heading and ruling angle at arbitrary arc lengths.

        Integrates one RK4 step from the nearest node, mirroring how the
        patch itself is evaluated off-grid.
        """
        s = np.asarray(s, dtype=float)
        flat = np.clip(s.reshape(-1), 0.0, self.s[-1])
        h = self.s[1] - self.s[0]
        k = np.clip(np.rint(flat / h).astype(int), 0, len(self.s) - 1)
        ds = flat - self.s[k]
        state0 = np.concatenate([self.position[k], self.heading[k, None]], axis=-1)
        n = len(flat)
        kk, aa = _kappa_angle(self.patch, np.concatenate([self.s[k] + 0.5 * ds, flat]))
        km, k1, ang = kk[:n], kk[n:], aa[n:]
        state = _rk4(state0, self.kappa[k], km, k1, ds)
        on_node = ds == 0.0
        state[on_node] = state0[on_node]
        ang[on_node] = self.angle[k[on_node]]
        return (
            state[:, :2].reshape(s.shape + (2,)),
            state[:, 2].reshape(s.shape),
            ang.reshape(s.shape),
        )

    def point(self, s, u):
        """Image of patch parameters ``(s, u)`` in the plane."""
        pos, th, ang = self.local(s)
        u = np.asarray(u, dtype=float)
        r = np.stack([np.cos(th + ang), np.sin(th + ang)], axis=-1)
        return pos + u[..., None] * r


def develop_patch(patch: RuledPatch) -> PlanarStrip:
    """Unroll ``patch`` into the plane, starting at the origin heading along ``+x``."""
    _require_surface_case(patch)
    fc = patch.framed
    s = fc.s
    h = fc.step
    kappa, angle = _kappa_angle(patch, s)
    km, _ = _kappa_angle(patch, 0.5 * (s[:-1] + s[1:]))
    state = np.zeros((len(s), 3))
    hh = np.full((), h)
    for k in range(len(s) - 1):
        state[k + 1] = _rk4(state[k], kappa[k], km[k], kappa[k + 1], hh)
    return PlanarStrip(patch, s, state[:, :2], state[:, 2], kappa, angle, float(patch.half_widths[0]))


def total_geodesic_curvature(patch: RuledPatch, panels=None):
    """``int kappa_g ds`` by composite 8-point Gauss-Legendre over ``panels`` panels."""
    _require_surface_case(patch)
    panels = panels or 2 * patch.framed.K
    edges = np.linspace(0.0, patch.length, panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    pts = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    kappa, _ = _kappa_angle(patch, pts.reshape(-1))
    return float(np.sum(half[:, None] * _GL_WEIGHTS[None, :] * kappa.reshape(pts.shape)))


# --------------------------------------------------------------------------
# isometry checks


def _mesh_edges(ns, nu):
    """Vertex index pairs of the ``ns x nu`` quad grid split into triangles."""
    idx = np.arange((ns + 1) * (nu + 1)).reshape(ns + 1, nu + 1)
    along_s = np.stack([idx[:-1, :].ravel(), idx[1:, :].ravel()], axis=-1)
    along_u = np.stack([idx[:, :-1].ravel(), idx[:, 1:].ravel()], axis=-1)
    diag = np.stack([idx[:-1, :-1].ravel(), idx[1:, 1:].ravel()], axis=-1)
    return np.concatenate([along_s, along_u, diag])


def edge_length_errors(strip: PlanarStrip, ns=256, nu=64, subdivisions=64):
    """Relative mismatch of every mesh edge measured in the patch and in the plane.

    Each edge is a straight segment in the ``(s, u)`` parameter domain, and
    its length is taken along the image of that segment (a polyline with
    ``subdivisions`` pieces) on both sides. Returns ``(curve_errors,
    chord_errors)``. The second entry compares straight chords instead, which
    also picks up the bending of the patch in space and so is only accurate
    to second order in the edge length.
    """
    patch = strip.patch
    v = strip.half_width
    L = patch.length
    # every edge polyline samples s on this common refinement
    s_fine = np.linspace(0.0, L, ns * subdivisions + 1)
    sec = patch.local(s_fine)
    g3, X3 = sec.gamma, sec.X[:, 0, :]
    g2, th, ang = strip.local(s_fine)
    X2 = np.stack([np.cos(th + ang), np.sin(th + ang)], axis=-1)

    u_nodes = np.linspace(-v, v, nu + 1)
    edges = _mesh_edges(ns, nu)
    ia, ja = np.divmod(edges[:, 0], nu + 1)
    ib, jb = np.divmod(edges[:, 1], nu + 1)
    frac = np.arange(subdivisions + 1) / subdivisions
    si = ia[:, None] * subdivisions + np.rint((ib - ia)[:, None] * subdivisions * frac).astype(int)
    u = u_nodes[ja][:, None] + (u_nodes[jb] - u_nodes[ja])[:, None] * frac
    p3 = g3[si] + u[..., None] * X3[si]
    p2 = g2[si] + u[..., None] * X2[si]
    l3 = np.sum(np.linalg.norm(np.diff(p3, axis=1), axis=-1), axis=1)
    l2 = np.sum(np.linalg.norm(np.diff(p2, axis=1), axis=-1), axis=1)
    curve_err = np.abs(l3 - l2) / l3
    c3 = np.linalg.norm(p3[:, -1] - p3[:, 0], axis=-1)
    c2 = np.linalg.norm(p2[:, -1] - p2[:, 0], axis=-1)
    chord_err = np.abs(c3 - c2) / c3
    return curve_err, chord_err


def collinearity(points):
    """Largest distance of ``points`` (shape ``(n, d)``) from their best-fit line."""
    P = np.asarray(points, dtype=float)
    c = P.mean(axis=0)
    _, sv, Vt = np.linalg.svd(P - c, full_matrices=False)
    d = Vt[0]
    rel = P - c
    return float(np.max(np.linalg.norm(rel - np.outer(rel @ d, d), axis=-1)))


def ruling_collinearity(strip: PlanarStrip, count=64, samples=17):
    """Worst deviation from straightness of developed rulings.

    Points along each ruling are mapped into the plane through distances
    measured in space, so this checks that the patch and the development
    agree on the straightness of rulings rather than restating the
    construction.
    """
    patch = strip.patch
    s = np.linspace(0.0, patch.length, count)
    u = np.linspace(-strip.half_width, strip.half_width, samples)
    sec = patch.local(s)
    worst = 0.0
    pos, th, ang = strip.local(s)
    for k in range(count):
        p3 = sec.gamma[k] + u[:, None] * sec.X[k, 0]
        # planar points placed at the spatial distance from the curve point
        d = np.linalg.norm(p3 - sec.gamma[k], axis=-1) * np.sign(u)
        r = np.array([np.cos(th[k] + ang[k]), np.sin(th[k] + ang[k])])
        worst = max(worst, collinearity(pos[k] + d[:, None] * r), collinearity(p3))
    return worst
