"""Flat approximation of a hypersurface along a framed curve.

Given the Bishop frame ``E_1..E_m`` and the coefficients ``tau`` along the
curve, the ruling fields

    X_j = (-1)^j tau_{m-j+1} E_1 + (-1)^(j-1) tau_1 E_{m-j+1},   j = 1..m-1

span, at every point, the unique family of (m-1)-planes whose union is a
developable hypersurface tangent to the surface along the curve. The patch

    sigma(s, u) = gamma(s) + sum_j u_j X_j(s)

is sampled on the arc-length grid; between nodes the frame is carried
from the nearest node so off-grid points are as accurate as the nodes.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.spatial import cKDTree

from . import multicross
from ._grid import diff4, interp4
from .errors import DegeneratePatchError, InputError, PatchDomainError
from .frames import FramedCurve, check_nonasymptotic

SYSTEM_TOL = 1e-12
NONDEGENERACY_TOL = 1e-8
MAX_WIDTH_FACTOR = 10.0
INJECTIVITY_GAP = 4


@dataclass(frozen=True)
class RulingField:
    """Unit ruling vectors ``X[k, j]`` and their arc-length derivatives at the grid nodes."""

    X: np.ndarray  # (K+1, m-1, m+1)
    dX: np.ndarray  # (K+1, m-1, m+1)
    raw: np.ndarray  # before normalization
    dtau: np.ndarray  # differenced tau on the grid, reused off-grid
    normalized: bool = True
    override: str | None = None

    @property
    def count(self):
        return self.X.shape[1]


def _parse_override(override, m):
    if not override:
        return None
    name = override.lower()
    if not (name.startswith("e") and name[1:].isdigit()):
        raise InputError(f"unknown ruling override {override!r}; expected e2..e{m}")
    k = int(name[1:]) - 1
    if not 1 <= k < m:
        raise InputError(f"ruling override {override!r} out of range for m={m}")
    return k


def _assemble(E, dE, tau, dtau, override=None):
    """Unit rulings and their derivatives from frame data shaped ``(..., m, m+1)``."""
    m = E.shape[-2]
    X, dX = [], []
    for j in range(1, m):
        k = m - j  # 0-based index of E_{m-j+1}
        sa, sb = (-1) ** j, (-1) ** (j - 1)
        a, b = sa * tau[..., k, None], sb * tau[..., 0, None]
        da, db = sa * dtau[..., k, None], sb * dtau[..., 0, None]
        X.append(a * E[..., 0, :] + b * E[..., k, :])
        dX.append(da * E[..., 0, :] + a * dE[..., 0, :] + db * E[..., k, :] + b * dE[..., k, :])
    raw = np.stack(X, axis=-2)
    draw = np.stack(dX, axis=-2)
    k = _parse_override(override, m)
    if k is not None:
        raw[..., 0, :] = E[..., k, :]
        draw[..., 0, :] = dE[..., k, :]
    norm = np.linalg.norm(raw, axis=-1, keepdims=True)
    Xn = raw / norm
    dXn = (draw - np.sum(Xn * draw, axis=-1, keepdims=True) * Xn) / norm
    return Xn, dXn, raw


def ruling_fields(fc: FramedCurve, override: str | None = None, check=True) -> RulingField:
    """Torse rulings along ``fc``, normalized to unit length.

    Derivatives come from the transport equations of the frame and the
    product rule; only ``dtau/ds`` is differenced (4th order on the grid), and
    it multiplies tangent vectors whose contribution to the developability
    condition cancels.

    ``override`` is a test hook: ``"e<k>"`` replaces ``X_1`` by the frame
    vector ``E_k`` (2 <= k <= m), which in general is not a torse ruling.
    """
    _parse_override(override, fc.m)
    if check:
        check_nonasymptotic(fc)
    dtau = diff4(fc.tau, fc.step)
    X, dX, raw = _assemble(fc.E, fc.frame_derivative(), fc.tau, dtau, override)
    return RulingField(X, dX, raw, dtau, True, override)


def system_residual(fc: FramedCurve, rf: RulingField, per_node=False):
    """``max |sum_i X_j^i tau_i|`` with frame coordinates ``X_j^i = <X_j, E_i>``."""
    coords = np.einsum("kja,kia->kji", rf.X, fc.E)
    r = np.max(np.abs(coords @ fc.tau[:, :, None]), axis=(1, 2))
    return r if per_node else float(np.max(r))


def nondegeneracy(fc: FramedCurve, rf: RulingField, per_node=False):
    """``min_k |T x X_1 x ... x X_{m-1}| / (|T| prod |X_j|)`` over the grid."""
    stack = np.concatenate([fc.tangent[:, None, :], rf.X], axis=1)
    vol = np.linalg.norm(multicross.cross(stack), axis=-1)
    scale = np.prod(np.linalg.norm(stack, axis=-1), axis=-1)
    r = vol / scale
    return r if per_node else float(np.min(r))


@dataclass(frozen=True)
class PatchSection:
    s: np.ndarray
    t: np.ndarray
    gamma: np.ndarray
    tangent: np.ndarray
    curvature_vector: np.ndarray
    normal: np.ndarray
    X: np.ndarray
    dX: np.ndarray


@dataclass(frozen=True)
class RuledPatch:
    """``sigma(s, u) = gamma(s) + sum_j u_j X_j(s)`` on ``[0, L] x V``."""

    framed: FramedCurve
    rulings: RulingField
    half_widths: np.ndarray
    max_tested: float | None = None  # v* from box estimation
    sampled_injective: bool = False

    @property
    def m(self):
        return self.framed.m

    @property
    def length(self):
        return self.framed.length

    def _check(self, s, u):
        s = np.asarray(s, dtype=float)
        if np.any((s < -1e-12) | (s > self.length * (1 + 1e-12))):
            raise PatchDomainError(f"arc length outside [0, {self.length:.6g}]")
        if u is not None:
            u = np.asarray(u, dtype=float)
            if u.shape[-1] != self.m - 1:
                raise PatchDomainError(f"ruling parameter must have {self.m - 1} components")
            if np.any(np.abs(u) > self.half_widths * (1 + 1e-12)):
                raise PatchDomainError("ruling parameter outside the admissible box")
            return s, u
        return s, None

    def local(self, s) -> "PatchSection":
        """Curve point, tangent, rulings and ruling derivatives at arc lengths ``s``."""
        s = np.asarray(s, dtype=float)
        flat = np.clip(s.reshape(-1), 0.0, self.length)
        lf = self.framed.local(flat)
        dtau = interp4(0.0, self.framed.step, self.rulings.dtau, flat)
        X, dX, _ = _assemble(lf.E, lf.frame_derivative(), lf.tau, dtau, self.rulings.override)
        shape = s.shape
        return PatchSection(
            s=s,
            t=lf.t.reshape(shape),
            gamma=lf.position.reshape(shape + (-1,)),
            tangent=lf.tangent.reshape(shape + (-1,)),
            curvature_vector=lf.curvature_vector.reshape(shape + (-1,)),
            normal=lf.normal.reshape(shape + (-1,)),
            X=X.reshape(shape + X.shape[1:]),
            dX=dX.reshape(shape + dX.shape[1:]),
        )

    def gamma(self, s):
        return self.local(s).gamma

    def X(self, s):
        return self.local(s).X

    def with_box(self, half_widths):
        hw = np.broadcast_to(np.asarray(half_widths, dtype=float), (self.m - 1,)).copy()
        return replace(self, half_widths=hw)


def make_patch(fc: FramedCurve, rf: RulingField, half_widths=None) -> RuledPatch:
    if half_widths is None:
        half_widths = np.full(fc.m - 1, np.inf)
    hw = np.broadcast_to(np.asarray(half_widths, dtype=float), (fc.m - 1,)).copy()
    return RuledPatch(fc, rf, hw)


def sigma(patch: RuledPatch, s, u):
    """Point of the ruled patch; ``s`` is arc length along the curve."""
    s, u = patch._check(s, u)
    sec = patch.local(s)
    return sec.gamma + np.einsum("...j,...ja->...a", u, sec.X)


def _Z(sec, u):
    lead = sec.tangent + np.einsum("...j,...ja->...a", u, sec.dX)
    return multicross.cross(np.concatenate([lead[..., None, :], sec.X], axis=-2))


def _dZ(sec):
    out = [multicross.cross(np.concatenate([sec.dX[..., j, None, :], sec.X], axis=-2)) for j in range(sec.X.shape[-2])]
    return np.stack(out, axis=-2)


def normal_Z(patch: RuledPatch, s, u):
    """Unnormalized normal ``(T + sum u_i dX_i) x X_1 x ... x X_{m-1}``."""
    s, u = patch._check(s, u)
    return _Z(patch.local(s), u)


def dZ_du(patch: RuledPatch, s):
    """``dZ/du_j = dX_j x X_1 x ... x X_{m-1}``, independent of ``u``."""
    return _dZ(patch.local(s))


def flatness_residual(patch: RuledPatch, s):
    """Normalized ``T . (dX_j x X_1 x ... x X_{m-1})`` for each ``j``.

    Vanishes exactly for a developable patch. The rate ``|dX_j|`` in the
    normalization is floored by the curvature ``|gamma''|`` of the curve, so
    rulings that are locally constant (``dX_j ~ 0``) do not turn round-off
    into an O(1) ratio. The floor never vanishes because ``|gamma''| >=
    |tau_1| > 0`` away from asymptotic directions.
    """
    sec = patch.local(patch._check(s, None)[0])
    num = np.einsum("...a,...ja->...j", sec.tangent, _dZ(sec))
    rate = np.maximum(np.linalg.norm(sec.dX, axis=-1), np.linalg.norm(sec.curvature_vector, axis=-1)[..., None])
    scale = np.linalg.norm(sec.tangent, axis=-1)[..., None] * np.prod(np.linalg.norm(sec.X, axis=-1), axis=-1)[..., None]
    scale = scale * rate
    return np.divide(num, scale, out=np.zeros_like(num), where=scale > 0)


def tangency_residual(patch: RuledPatch, s):
    """Angle (radians) between the patch normal on the curve and the surface normal."""
    sec = patch.local(patch._check(s, None)[0])
    Z = _Z(sec, np.zeros(sec.s.shape + (patch.m - 1,)))
    N = sec.normal
    along = np.sum(Z * N, axis=-1)
    perp = np.linalg.norm(Z - along[..., None] * N, axis=-1)
    return np.arctan2(perp, np.abs(along))


# --------------------------------------------------------------------------
# admissible box


def _probe_directions(d, count, rng):
    """Unit-cube boundary directions in ``R^d``: corners, axes, then random fill."""
    if d == 1:
        return np.array([[1.0], [-1.0]])
    dirs = [np.array(c, dtype=float) for c in np.ndindex(*(2,) * d)]
    dirs = [2 * c - 1 for c in dirs]
    for i in range(d):
        e = np.zeros(d)
        e[i] = 1.0
        dirs += [e, -e]
    while len(dirs) < count:
        dirs.append(rng.standard_normal(d))
    D = np.array(dirs[:max(count, 2 * d)])
    return D / np.max(np.abs(D), axis=1, keepdims=True)


def _immersion_ok(Z0, dZ, dirs, v, floor):
    """Whether ``|Z0 + mu dZ.d| >= floor |Z0|`` for all ``mu`` in ``[0, v]`` along every probe ray."""
    b = np.einsum("pj,kja->kpa", dirs, dZ)  # (K, P, n)
    a = Z0[:, None, :]
    bb = np.sum(b * b, axis=-1)
    ab = np.sum(a * b, axis=-1)
    mu = np.clip(np.divide(-ab, bb, out=np.zeros_like(ab), where=bb > 0), 0.0, v)
    closest = np.linalg.norm(a + mu[..., None] * b, axis=-1)
    return bool(np.all(closest >= floor * np.linalg.norm(Z0, axis=-1)[:, None]))


def _injective(patch, dirs, v, stride, closed):
    """Sampled separation test between rulings at least a few grid steps apart."""
    fc = patch.framed
    K = fc.K
    idx = np.arange(0, K + 1 if not closed else K, stride)
    lam = np.array([0.25, 0.5, 0.75, 1.0])
    U = np.concatenate([np.zeros((1, dirs.shape[1])), (lam[:, None, None] * v * dirs[None]).reshape(-1, dirs.shape[1])])
    X = patch.rulings.X
    pts = fc.position[idx, None, :] + np.einsum("uj,kja->kua", U, X[idx])
    # distance from each probe point to the ruling plane a few steps ahead (or behind)
    other = idx + INJECTIVITY_GAP
    if closed:
        other = other % K
    else:
        other = np.where(other > K, idx - INJECTIVITY_GAP, other)
    Q, _ = np.linalg.qr(np.swapaxes(X[other], -1, -2))  # orthonormal basis of each ruling plane
    rel = pts - fc.position[other, None, :]
    proj = np.einsum("kau,kpa->kpu", Q, rel)
    delta = np.linalg.norm(rel - np.einsum("kau,kpu->kpa", Q, proj), axis=-1)
    flat = pts.reshape(-1, pts.shape[-1])
    owner = np.repeat(idx, pts.shape[1])
    dflat = delta.reshape(-1)
    tree = cKDTree(flat)
    pairs = tree.query_pairs(0.5 * float(np.max(dflat)), output_type="ndarray")
    if pairs.size == 0:
        return True
    i, j = pairs[:, 0], pairs[:, 1]
    gap = np.abs(owner[i] - owner[j])
    if closed:
        gap = np.minimum(gap, K - gap)
    far = gap >= INJECTIVITY_GAP
    dist = np.linalg.norm(flat[i] - flat[j], axis=-1)
    too_close = dist < 0.5 * np.minimum(dflat[i], dflat[j])
    return not bool(np.any(far & too_close))


def estimate_box(patch: RuledPatch, safety=0.5, directions=64, seed=0, max_half_width=None, check_injective=True):
    """Largest uniform half-width on which the patch is safely immersive.

    A width ``v`` passes when, along 64 probe directions at every grid node,
    ``|Z(s, u)|`` never drops below ``safety * |Z(s, 0)|`` for ``u`` in the
    box, and the sampled separation test finds no near-collisions between
    distant rulings. ``v*`` is bracketed on a dyadic ladder from
    ``10 * length`` down, then refined by bisection; the patch returned carries
    the box ``(1 - safety) * v*``.
    """
    if not 0.0 < safety < 1.0:
        raise ValueError("safety must lie in (0, 1)")
    fc = patch.framed
    L = fc.length
    vmax = MAX_WIDTH_FACTOR * L if max_half_width is None else float(max_half_width)
    rng = np.random.default_rng(seed)
    dirs = _probe_directions(patch.m - 1, directions, rng)
    Z0 = multicross.cross(np.concatenate([fc.tangent[:, None, :], patch.rulings.X], axis=1))
    full = make_patch(fc, patch.rulings)
    dZ = dZ_du(full, fc.s)
    closed = fc.is_closed
    stride = max(1, fc.K // 128) if patch.m > 2 else 1

    def passes(v):
        if not _immersion_ok(Z0, dZ, dirs, v, safety):
            return False
        return not check_injective or _injective(full, dirs, v, stride, closed)

    v_star = None
    if passes(vmax):
        v_star = vmax
    else:
        hi = vmax
        for _ in range(60):
            lo = 0.5 * hi
            if passes(lo):
                break
            hi = lo
        else:
            lo = 0.0
        if lo > 0.0:
            for _ in range(48):
                mid = 0.5 * (lo + hi)
                if passes(mid):
                    lo = mid
                else:
                    hi = mid
                if hi - lo <= 1e-13 * hi:
                    break
        v_star = lo
    if v_star < 1e-6 * L:
        raise DegeneratePatchError(f"admissible box half-width {v_star:.3e} is below 1e-6 of the curve length")
    hw = np.full(patch.m - 1, (1.0 - safety) * v_star)
    return RuledPatch(fc, patch.rulings, hw, max_tested=v_star, sampled_injective=check_injective)


def build_patch(fc: FramedCurve, safety=0.5, seed=0, override=None, half_widths=None):
    """Rulings plus an admissible box (estimated unless ``half_widths`` is given)."""
    rf = ruling_fields(fc, override=override)
    patch = make_patch(fc, rf)
    if half_widths is not None:
        return patch.with_box(half_widths)
    return estimate_box(patch, safety=safety, seed=seed)


# --------------------------------------------------------------------------
# comparisons between patches


def span_distance(A, B):
    """Largest principal angle between the row spans of ``A`` and ``B`` (batched)."""
    Qa, _ = np.linalg.qr(np.swapaxes(A, -1, -2))
    Qb, _ = np.linalg.qr(np.swapaxes(B, -1, -2))
    # sine of the largest angle; better conditioned than arccos near zero
    proj = Qb - Qa @ (np.swapaxes(Qa, -1, -2) @ Qb)
    return np.arcsin(np.clip(np.linalg.norm(proj, ord=2, axis=(-2, -1)), 0.0, 1.0))


def surface_distance(P, patch: RuledPatch, s):
    """Distance from points ``P[k, ...]`` to the ruling plane of ``patch`` at ``s[k]``."""
    g = patch.gamma(s)
    X = patch.X(s)
    Q, _ = np.linalg.qr(np.swapaxes(X, -1, -2))
    rel = P - g[:, None, :]
    proj = np.einsum("kau,kpa->kpu", Q, rel)
    return np.linalg.norm(rel - np.einsum("kau,kpu->kpa", Q, proj), axis=-1)


def hausdorff_on_box(p1: RuledPatch, p2: RuledPatch, n_s=200, n_u=9):
    """Symmetric max distance between dense samples of one patch and the other patch.

    Both patches must share the arc-length parametrization of the curve. Each
    sample is compared with the ruling plane of the other patch through the
    same curve point, which bounds its distance to that patch from above.
    """
    L = min(p1.length, p2.length)
    w = np.minimum(p1.half_widths, p2.half_widths)
    s = np.linspace(0.0, L, n_s)
    d = p1.m - 1
    grid = np.stack(np.meshgrid(*[np.linspace(-1, 1, n_u)] * d, indexing="ij"), -1).reshape(-1, d) * w
    worst = 0.0
    for a, b in ((p1, p2), (p2, p1)):
        pts = a.gamma(s)[:, None, :] + np.einsum("uj,kja->kua", grid, a.X(s))
        worst = max(worst, float(np.max(surface_distance(pts, b, s))))
    return worst
