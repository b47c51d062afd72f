"""Flat strip along a circle of latitude on the unit sphere.

The tangent planes of the sphere along the latitude all pass through one
point on the axis, so the flat strip is a piece of a cone. The script finds
the apex from the rulings and unrolls the cone into a circular sector.

    python3 demos/tangent_cone.py [outdir]
"""
import math
import sys
from pathlib import Path

import numpy as np

from flatstrip import surface as S
from flatstrip.develop import develop_patch
from flatstrip.export import write_strip_svg
from flatstrip.flatapprox import build_patch
from flatstrip.frames import build_framed_curve
from flatstrip.report import ruling_apex


def main(outdir="demo_out"):
    out = Path(outdir)
    out.mkdir(exist_ok=True)
    phi = math.pi / 4
    fc = build_framed_curve(S.sphere(), S.make_curve(["t", f"{phi!r}"], 2 * math.pi))
    patch = build_patch(fc)
    apex, spread = ruling_apex(patch)
    print(f"curve length      {fc.length:.12f}")
    print(f"apex              {np.array2string(apex, precision=12)}  (expected z = {1 / math.sin(phi):.12f})")
    print(f"ruling spread     {spread:.2e}")
    print(f"box half-width    {patch.half_widths[0]:.6f}")

    strip = develop_patch(patch)
    print(f"sector turning    {strip.turning:.12f}  (2 pi sin phi = {2 * math.pi * math.sin(phi):.12f})")
    write_strip_svg(out / "cone_strip.svg", strip)
    print(f"wrote {out / 'cone_strip.svg'}")


if __name__ == "__main__":
    main(*sys.argv[1:])
