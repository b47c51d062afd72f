"""Scene files: one JSON document describing a surface, a curve and run settings.

Example::

    {
      "schema": 1,
      "surface": {"kind": "sphere", "radius": 1.0},
      "curve": {"coords": ["t", "pi/4"], "alpha": "2*pi"},
      "grid": {"samples": 512},
      "box": {"mode": "auto", "safety": 0.5},
      "frame": {"rotation": []},
      "tolerances": {"flatness": 1e-8},
      "seed": 0
    }

Numbers may be given as JSON numbers or as constant expressions such as
``"2*pi"``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from . import surface as surf
from .errors import InputError, SceneError
from .exprsurf import eval_value, parse_expression
from .frames import DEFAULT_SAMPLES, MAX_SAMPLES, MIN_SAMPLES

SCHEMA_VERSION = 1

DEFAULT_TOLERANCES = {
    "orthonormality": 1e-12,
    "parallelism": 1e-8,
    "nonasymptotic": 1e-8,
    "system": 1e-12,
    "nondegeneracy": 1e-8,
    "flatness": 1e-8,
    "tangency": 1e-8,
    "box": 1e-6,
    "isometry": 1e-6,
}

_TOP_KEYS = {"schema", "surface", "curve", "grid", "box", "frame", "tolerances", "seed", "name"}
_SURFACE_KEYS = {
    "plane": {"m"},
    "sphere": {"radius", "m"},
    "cylinder": {"radius"},
    "ellipsoid": {"axes"},
    "torus": {"major", "minor"},
    "graph": {"height", "m", "domain"},
    "parametric": {"coords", "domain"},
}


@dataclass
class Scene:
    surface: surf.Hypersurface
    curve: surf.CurveOnSurface
    samples: int = DEFAULT_SAMPLES
    box_mode: str = "auto"
    safety: float = 0.5
    half_widths: list | None = None
    rotation: list = field(default_factory=list)
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    seed: int = 0
    name: str = ""
    document: dict = field(default_factory=dict)

    @property
    def m(self):
        return self.surface.dim


def number(value, where):
    """A float from a JSON number or a constant expression."""
    if isinstance(value, bool):
        raise SceneError(f"{where}: expected a number, got a boolean")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(eval_value(parse_expression(value, []), {}))
        except InputError as exc:
            raise SceneError(f"{where}: {exc}") from exc
    raise SceneError(f"{where}: expected a number or constant expression, got {type(value).__name__}")


def _section(doc, key, required=False):
    val = doc.get(key)
    if val is None:
        if required:
            raise SceneError(f"scene is missing the '{key}' section")
        return {}
    if not isinstance(val, dict):
        raise SceneError(f"'{key}' must be an object")
    return val


def _strings(value, where, count=None):
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise SceneError(f"{where} must be a list of expression strings")
    if count is not None and len(value) != count:
        raise SceneError(f"{where} needs {count} entries, got {len(value)}")
    return value


def _domain(desc, m, where):
    if desc is None:
        return None, None
    if not isinstance(desc, dict) or set(desc) - {"lower", "upper"}:
        raise SceneError(f"{where} must be an object with 'lower' and 'upper'")
    lo = [number(v, f"{where}.lower") for v in desc.get("lower", [])]
    hi = [number(v, f"{where}.upper") for v in desc.get("upper", [])]
    if len(lo) != m or len(hi) != m:
        raise SceneError(f"{where} needs {m} lower and {m} upper bounds")
    if any(a >= b for a, b in zip(lo, hi)):
        raise SceneError(f"{where} has an empty interval")
    return lo, hi


def _dimension(desc, where):
    m = desc.get("m", 2)
    if isinstance(m, bool) or not isinstance(m, int) or not 2 <= m <= 7:
        raise SceneError(f"{where}.m must be an integer between 2 and 7")
    return m


def build_surface(desc) -> surf.Hypersurface:
    kind = desc.get("kind")
    if kind not in _SURFACE_KEYS:
        raise SceneError(f"unknown surface kind {kind!r}; expected one of {sorted(_SURFACE_KEYS)}")
    extra = set(desc) - _SURFACE_KEYS[kind] - {"kind"}
    if extra:
        raise SceneError(f"surface '{kind}' does not take {sorted(extra)}")
    where = "surface"
    if kind == "plane":
        return surf.plane(_dimension(desc, where))
    if kind == "sphere":
        r = number(desc.get("radius", 1.0), "surface.radius")
        if r <= 0:
            raise SceneError("surface.radius must be positive")
        return surf.sphere(r, _dimension(desc, where))
    if kind == "cylinder":
        r = number(desc.get("radius", 1.0), "surface.radius")
        if r <= 0:
            raise SceneError("surface.radius must be positive")
        return surf.cylinder(r)
    if kind == "ellipsoid":
        axes = desc.get("axes", [1.0, 1.0, 1.0])
        if not isinstance(axes, list) or len(axes) != 3:
            raise SceneError("surface.axes must list three semi-axes")
        axes = [number(a, "surface.axes") for a in axes]
        if min(axes) <= 0:
            raise SceneError("surface.axes must be positive")
        return surf.ellipsoid(axes)
    if kind == "torus":
        R = number(desc.get("major", 2.0), "surface.major")
        r = number(desc.get("minor", 1.0), "surface.minor")
        if not 0 < r < R:
            raise SceneError("torus needs 0 < minor < major")
        return surf.torus(R, r)
    if kind == "graph":
        if not isinstance(desc.get("height"), str):
            raise SceneError("surface.height must be an expression string")
        m = _dimension(desc, where)
        lo, hi = _domain(desc.get("domain"), m, "surface.domain")
        return surf.graph(desc["height"], m, lo, hi)
    coords = _strings(desc.get("coords"), "surface.coords")
    m = len(coords) - 1
    if not 2 <= m <= 7:
        raise SceneError("surface.coords must have between 3 and 8 entries")
    lo, hi = _domain(desc.get("domain"), m, "surface.domain")
    return surf.parametric(coords, lo, hi)


def parse_scene(doc: dict) -> Scene:
    """Validate a decoded scene document and build its objects."""
    if not isinstance(doc, dict):
        raise SceneError("scene must be a JSON object")
    if doc.get("schema") != SCHEMA_VERSION:
        raise SceneError(f"unsupported scene schema {doc.get('schema')!r}; expected {SCHEMA_VERSION}")
    extra = set(doc) - _TOP_KEYS
    if extra:
        raise SceneError(f"unknown scene keys {sorted(extra)}")
    try:
        S = build_surface(_section(doc, "surface", required=True))
        cdesc = _section(doc, "curve", required=True)
        if set(cdesc) - {"coords", "alpha"}:
            raise SceneError(f"unknown curve keys {sorted(set(cdesc) - {'coords', 'alpha'})}")
        coords = _strings(cdesc.get("coords"), "curve.coords", S.dim)
        alpha = number(cdesc.get("alpha", "2*pi"), "curve.alpha")
        if not alpha > 0:
            raise SceneError("curve.alpha must be positive")
        curve = surf.make_curve(coords, alpha)
    except SceneError:
        raise
    except InputError as exc:
        raise SceneError(str(exc)) from exc

    scene = Scene(S, curve, name=str(doc.get("name", "")), document=doc)
    grid = _section(doc, "grid")
    if "samples" in grid:
        K = grid["samples"]
        if isinstance(K, bool) or not isinstance(K, int) or not MIN_SAMPLES <= K <= MAX_SAMPLES:
            raise SceneError(f"grid.samples must be an integer in [{MIN_SAMPLES}, {MAX_SAMPLES}]")
        scene.samples = K

    box = _section(doc, "box")
    mode = box.get("mode", "auto")
    if mode == "auto":
        scene.safety = number(box.get("safety", 0.5), "box.safety")
        if not 0 < scene.safety < 1:
            raise SceneError("box.safety must lie in (0, 1)")
    elif mode == "explicit":
        hw = box.get("half_widths")
        if not isinstance(hw, list) or len(hw) != S.dim - 1:
            raise SceneError(f"box.half_widths must list {S.dim - 1} values")
        scene.half_widths = [number(v, "box.half_widths") for v in hw]
        if min(scene.half_widths) <= 0:
            raise SceneError("box.half_widths must be positive")
    else:
        raise SceneError(f"box.mode must be 'auto' or 'explicit', got {mode!r}")
    scene.box_mode = mode

    frame = _section(doc, "frame")
    rot = frame.get("rotation", [])
    if not isinstance(rot, list):
        raise SceneError("frame.rotation must be a list of angles")
    scene.rotation = [number(a, "frame.rotation") for a in rot]
    need = (S.dim - 1) * (S.dim - 2) // 2
    if scene.rotation and len(scene.rotation) != need:
        raise SceneError(f"frame.rotation needs {need} angles for m={S.dim}")

    tol = _section(doc, "tolerances")
    unknown = set(tol) - set(DEFAULT_TOLERANCES)
    if unknown:
        raise SceneError(f"unknown tolerance names {sorted(unknown)}")
    for k, v in tol.items():
        scene.tolerances[k] = number(v, f"tolerances.{k}")

    seed = doc.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
        raise SceneError("seed must be a non-negative 64-bit integer")
    scene.seed = seed
    return scene


def load_scene(path) -> Scene:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SceneError(f"cannot read scene {path}: {exc.strerror}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SceneError(f"scene {path} is not valid JSON: {exc}") from exc
    return parse_scene(doc)
