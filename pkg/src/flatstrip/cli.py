"""Command-line driver.

    flatstrip build   <scene> -o <dir>   patch mesh, curve polyline, report.json
    flatstrip verify  <scene> [-o dir]   report.json only
    flatstrip develop <scene> -o <dir>   strip.svg, strip.csv, report.json (m = 2)

Exit codes: 0 all checks pass, 2 the curve meets an asymptotic direction,
3 the scene does not parse or validate, 4 a check failed (artifacts are still
written), 5 development requested for m != 2.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from pathlib import Path

from . import export
from .errors import (
    AsymptoticDirectionError,
    DegenerateChartError,
    DegenerateCurveError,
    DegeneratePatchError,
    EvaluationError,
    InputError,
    RefineGridError,
)
from .flatapprox import estimate_box, make_patch, ruling_fields
from .frames import build_framed_curve, check_nonasymptotic, rotation_from_angles
from .report import verify
from .scene import DEFAULT_TOLERANCES, MAX_SAMPLES, MIN_SAMPLES, SceneError, load_scene, number

EXIT_OK = 0
EXIT_ASYMPTOTIC = 2
EXIT_INPUT = 3
EXIT_CHECKS = 4
EXIT_DIMENSION = 5

log = logging.getLogger("flatstrip")


def _parser():
    p = argparse.ArgumentParser(prog="flatstrip", description="Flat approximations of hypersurfaces along curves.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, needs_out in (("build", True), ("verify", False), ("develop", True)):
        sp = sub.add_parser(name)
        sp.add_argument("scene")
        sp.add_argument("-o", "--output", required=needs_out, default=None if needs_out else ".")
        sp.add_argument("--samples", type=int)
        sp.add_argument("--safety", type=float)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--frame-rotation", help="comma-separated rotation angles of the initial normal frame")
        sp.add_argument("--ruling-override", help="replace the first ruling by a frame vector (e.g. e2); test hook")
        for key in DEFAULT_TOLERANCES:
            sp.add_argument(f"--tol-{key}", type=float, dest=f"tol_{key}")
    return p


def _apply_flags(scene, args):
    if args.samples is not None:
        if not MIN_SAMPLES <= args.samples <= MAX_SAMPLES:
            raise SceneError(f"--samples must lie in [{MIN_SAMPLES}, {MAX_SAMPLES}]")
        scene.samples = args.samples
    if args.safety is not None:
        if not 0 < args.safety < 1:
            raise SceneError("--safety must lie in (0, 1)")
        scene.safety = args.safety
    if args.seed is not None:
        if not 0 <= args.seed < 2**64:
            raise SceneError("--seed must be a non-negative 64-bit integer")
        scene.seed = args.seed
    if args.frame_rotation is not None:
        parts = [p for p in args.frame_rotation.split(",") if p.strip()]
        scene.rotation = [number(p.strip(), "--frame-rotation") for p in parts]
    for key in DEFAULT_TOLERANCES:
        val = getattr(args, f"tol_{key}")
        if val is not None:
            scene.tolerances[key] = val


def _fingerprint(doc):
    return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()


def _build(scene, override):
    m = scene.m
    try:
        rotation = rotation_from_angles(scene.rotation, m) if scene.rotation else None
    except ValueError as exc:
        raise SceneError(str(exc)) from exc
    fc = build_framed_curve(scene.surface, scene.curve, K=scene.samples, rotation=rotation,
                            parallel_tol=scene.tolerances["parallelism"])
    check_nonasymptotic(fc, tol=scene.tolerances["nonasymptotic"])
    rf = ruling_fields(fc, override=override, check=False)
    patch = make_patch(fc, rf)
    if scene.half_widths is not None:
        return patch.with_box(scene.half_widths)
    return estimate_box(patch, safety=scene.safety, seed=scene.seed)


def _print_report(rep, out):
    for c in rep.checks:
        rel = "<=" if c.kind == "max" else ">="
        where = "" if c.at_t is None else f" at t={c.at_t:.9g}"
        out.write(f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.value:.3e} {rel} {c.tolerance:.1e}{where}\n")


def run(argv=None, out=sys.stdout, err=sys.stderr) -> int:
    args = _parser().parse_args(argv)
    level = os.environ.get("FLATSTRIP_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")

    try:
        scene = load_scene(args.scene)
        _apply_flags(scene, args)
    except InputError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_INPUT
    if args.command == "develop" and scene.m != 2:
        err.write(f"error: planar development needs a surface in R^3 (m = 2), scene has m = {scene.m}\n")
        return EXIT_DIMENSION

    try:
        patch = _build(scene, args.ruling_override)
    except AsymptoticDirectionError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_ASYMPTOTIC
    except (InputError, DegenerateCurveError, DegenerateChartError, EvaluationError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_INPUT
    except (RefineGridError, DegeneratePatchError) as exc:
        err.write(f"check failed: {exc}\n")
        return EXIT_CHECKS

    outdir = Path(args.output)
    outdir.mkdir(parents=True, exist_ok=True)
    rep = verify(patch, scene.tolerances, seed=scene.seed, isometry=scene.m == 2)
    rep.meta.update({"command": args.command, "scene_name": scene.name, "scene_sha256": _fingerprint(scene.document)})

    header = [f"flatstrip {args.command} {scene.name}".rstrip(), f"seed {scene.seed}"]
    if args.command == "build":
        s, t, U, P = export.patch_grid(patch)
        if scene.m == 2:
            export.write_obj_mesh(outdir / "mesh.obj", P, header)
            export.write_obj_polyline(outdir / "curve.obj", patch.framed.position, header)
        else:
            export.write_grid_csv(outdir / "mesh.csv", t, U, P)
            export.write_curve_csv(outdir / "curve.csv", patch.framed.t, patch.framed.position)
    elif args.command == "develop":
        export.write_strip_svg(outdir / "strip.svg", rep.strip)
        export.write_strip_csv(outdir / "strip.csv", rep.strip)
    (outdir / "report.json").write_text(rep.to_json())

    _print_report(rep, out)
    return EXIT_OK if rep.passed else EXIT_CHECKS


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
