"""Verification reports: every numerical check on one built patch, as plain data."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import develop
from .flatapprox import RuledPatch, flatness_residual, nondegeneracy, system_residual, tangency_residual
from .scene import DEFAULT_TOLERANCES
from .surface import Hypersurface

REPORT_VERSION = 1
SELF_REPRODUCTION_WIDTH = 0.1


@dataclass
class Check:
    name: str
    value: float
    tolerance: float
    passed: bool
    at_s: float | None = None
    at_t: float | None = None
    kind: str = "max"  # "max": value <= tol passes; "min": value >= tol passes

    def as_dict(self):
        return {
            "name": self.name,
            "kind": self.kind,
            "value": _clean(self.value),
            "tolerance": _clean(self.tolerance),
            "passed": bool(self.passed),
            "at_s": _clean(self.at_s),
            "at_t": _clean(self.at_t),
        }


@dataclass
class Report:
    checks: list = field(default_factory=list)
    extras: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)
    strip: object = None  # planar development, when computed

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def check(self, name):
        return next(c for c in self.checks if c.name == name)

    def as_dict(self):
        return {
            "version": REPORT_VERSION,
            "meta": _clean(self.meta),
            "passed": self.passed,
            "checks": [c.as_dict() for c in self.checks],
            "extras": _clean(self.extras),
        }

    def to_json(self):
        return json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n"


def _clean(x):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    return x


def _max_check(name, values, s, t, tol):
    values = np.asarray(values, dtype=float)
    k = int(np.argmax(values))
    return Check(name, float(values[k]), tol, bool(values[k] <= tol), float(s[k]), float(t[k]))


def _min_check(name, values, s, t, tol):
    values = np.asarray(values, dtype=float)
    k = int(np.argmin(values))
    return Check(name, float(values[k]), tol, bool(values[k] >= tol), float(s[k]), float(t[k]), kind="min")


def project_to_surface(S: Hypersurface, P, x0, iters=30):
    """Distance from points ``P`` to the chart image, by Gauss-Newton from chart guesses ``x0``."""
    x = np.array(x0, dtype=float)
    lo, hi = np.asarray(S.lower), np.asarray(S.upper)
    for _ in range(iters):
        f, J, _ = S.jet(x)
        r = P - f
        JtJ = np.swapaxes(J, -1, -2) @ J
        step = np.linalg.solve(JtJ, np.einsum("...ai,...a->...i", J, r)[..., None])[..., 0]
        x = np.clip(x + step, lo, hi)
        if np.max(np.abs(step)) < 1e-15:
            break
    return np.linalg.norm(P - S.jet(x)[0], axis=-1)


def self_reproduction(patch: RuledPatch, width=SELF_REPRODUCTION_WIDTH, n_s=200, n_u=5):
    """Largest distance from patch samples with ``|u| <= width`` to the input surface."""
    w = np.minimum(patch.half_widths, width)
    s = np.linspace(0.0, patch.length, n_s)
    d = patch.m - 1
    U = np.stack(np.meshgrid(*[np.linspace(-1, 1, n_u)] * d, indexing="ij"), -1).reshape(-1, d) * w
    sec = patch.local(s)
    P = sec.gamma[:, None, :] + np.einsum("uj,kja->kua", U, sec.X)
    x0 = patch.framed.curve.jet(sec.t)[0]
    x0 = np.broadcast_to(x0[:, None, :], P.shape[:2] + (patch.m,))
    return float(np.max(project_to_surface(patch.framed.surface, P, x0))), w


def ruling_apex(patch: RuledPatch):
    """Least-squares common point of all ruling lines (m = 2).

    Returns ``None`` when the rulings are (nearly) parallel.
    """
    fc = patch.framed
    X = patch.rulings.X[:, 0, :]
    Pm = np.eye(3)[None] - X[:, :, None] * X[:, None, :]
    A = Pm.sum(0)
    b = np.einsum("kab,kb->a", Pm, fc.position)
    if np.linalg.cond(A) > 1e8:
        return None
    apex = np.linalg.solve(A, b)
    rel = apex - fc.position
    dist = np.linalg.norm(rel - np.sum(rel * X, -1)[:, None] * X, axis=-1)
    return apex, float(np.max(dist))


def verify(patch: RuledPatch, tolerances=None, seed=0, isometry=True, extras=True) -> Report:
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(tolerances or {})
    fc, rf = patch.framed, patch.rulings
    s, t = fc.s, fc.t
    rep = Report()

    full = np.concatenate([fc.E, fc.W[:, None, :]], axis=1)
    G = full @ np.swapaxes(full, -1, -2) - np.eye(full.shape[1])
    rep.checks.append(_max_check("orthonormality", np.max(np.abs(G), axis=(1, 2)), s, t, tol["orthonormality"]))
    par = fc.parallelism_residual()
    rep.checks.append(Check("parallelism", par, tol["parallelism"], par <= tol["parallelism"]))

    tau1 = np.abs(fc.tau[:, 0])
    floor = max(tol["nonasymptotic"] * float(np.max(np.linalg.norm(fc.tau, axis=-1))), 1e-12)
    rep.checks.append(_min_check("nonasymptotic_margin", tau1, s, t, floor))
    rep.checks.append(_max_check("system_identity", system_residual(fc, rf, per_node=True), s, t, tol["system"]))
    rep.checks.append(_min_check("nondegeneracy", nondegeneracy(fc, rf, per_node=True), s, t, tol["nondegeneracy"]))

    # off-grid samples between every pair of nodes, plus the nodes
    sd = np.linspace(0.0, fc.length, 2 * fc.K + 1)
    sec_t = patch.local(sd).t
    flat = np.max(np.abs(flatness_residual(patch, sd)), axis=-1)
    rep.checks.append(_max_check("flatness", flat, sd, sec_t, tol["flatness"]))
    rep.checks.append(_max_check("tangency", tangency_residual(patch, sd), sd, sec_t, tol["tangency"]))

    rel_width = float(np.min(patch.half_widths)) / fc.length
    rep.checks.append(Check("box", rel_width, tol["box"], bool(np.isfinite(rel_width) and rel_width >= tol["box"]), kind="min"))

    strip = None
    if patch.m == 2 and isometry:
        strip = develop.develop_patch(patch)
        curve_err, chord_err = develop.edge_length_errors(strip)
        rep.checks.append(Check("isometry", float(np.max(curve_err)), tol["isometry"], float(np.max(curve_err)) <= tol["isometry"]))
        total = develop.total_geodesic_curvature(patch)
        rep.extras["development"] = {
            "turning": strip.turning,
            "integrated_geodesic_curvature": total,
            "turning_mismatch": abs(strip.turning - total),
            "chord_isometry_max_relative_error": float(np.max(chord_err)),
            "curve_collinearity": develop.collinearity(strip.position),
            "ruling_collinearity": develop.ruling_collinearity(strip),
        }

    rep.meta = {
        "seed": seed,
        "samples": fc.K,
        "dimension": patch.m,
        "length": fc.length,
        "half_widths": patch.half_widths,
        "max_tested_half_width": patch.max_tested,
        "sampled_injective": patch.sampled_injective,
        "ruling_override": rf.override,
        "frame_max_correction": fc.max_correction,
    }
    if extras:
        dist, w = self_reproduction(patch)
        rep.extras["self_reproduction"] = {"max_distance_to_surface": dist, "ruling_width": w}
        if patch.m == 2:
            found = ruling_apex(patch)
            if found is None:
                rep.extras["apex"] = {"kind": "parallel_rulings"}
            else:
                apex, dist = found
                common = dist <= 1e-8 * max(1.0, float(np.linalg.norm(apex)))
                rep.extras["apex"] = {
                    "kind": "common_point" if common else "none",
                    "least_squares_point": apex,
                    "max_line_distance": dist,
                }
    rep.strip = strip
    return rep
