"""Flat strip along a wavy closed curve on an ellipsoid.

Builds the strip, checks it against the surface, writes an OBJ mesh and the
planar development. The development's edge lengths are compared with the
same edges measured on the strip in space.

    python3 demos/ellipsoid_strip.py [outdir]
"""
import math
import sys
from pathlib import Path

import numpy as np

from flatstrip import surface as S
from flatstrip.develop import develop_patch, edge_length_errors
from flatstrip.export import angle_defects, interior_vertices, patch_grid, read_obj, write_obj_mesh, write_strip_svg
from flatstrip.flatapprox import build_patch, flatness_residual, tangency_residual
from flatstrip.frames import build_framed_curve


def main(outdir="demo_out"):
    out = Path(outdir)
    out.mkdir(exist_ok=True)
    surf = S.ellipsoid((1, 1, 2))
    fc = build_framed_curve(surf, S.make_curve(["t", "0.3*sin(2*t)"], 2 * math.pi))
    patch = build_patch(fc)
    s = np.linspace(0, fc.length, 1001)
    print(f"samples K         {fc.K}")
    print(f"flatness          {np.max(np.abs(flatness_residual(patch, s))):.2e}")
    print(f"tangency (rad)    {np.max(tangency_residual(patch, s)):.2e}")
    print(f"box half-width    {patch.half_widths[0]:.6f}")

    _, _, _, P = patch_grid(patch)
    write_obj_mesh(out / "ellipsoid_strip.obj", P, ["ellipsoid (1, 1, 2) strip"])
    verts, faces = read_obj(out / "ellipsoid_strip.obj")
    defects = angle_defects(verts, faces)[interior_vertices(*P.shape[:2])]
    print(f"mesh angle defect {np.max(np.abs(defects)):.2e}")

    strip = develop_patch(patch)
    curve_err, chord_err = edge_length_errors(strip)
    print(f"edge length error {np.max(curve_err):.2e} (chords {np.max(chord_err):.2e})")
    write_strip_svg(out / "ellipsoid_strip.svg", strip)
    print(f"wrote {out / 'ellipsoid_strip.obj'} and {out / 'ellipsoid_strip.svg'}")


if __name__ == "__main__":
    main(*sys.argv[1:])
