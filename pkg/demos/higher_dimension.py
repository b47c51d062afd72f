"""Flat 3-fold tangent to the unit 3-sphere along a great circle, and a
wavy variant, in R^4.

Each point of the curve carries a 2-plane of rulings. The frame is started
with a random rotation of the normal vectors to show that the result does
not depend on that choice.

    python3 demos/higher_dimension.py
"""
import math

import numpy as np
from scipy.stats import special_ortho_group

from flatstrip import surface as S
from flatstrip.flatapprox import build_patch, flatness_residual, hausdorff_on_box, span_distance, tangency_residual
from flatstrip.frames import build_framed_curve


def main(seed=7):
    surf = S.sphere(m=3)
    for coords in (["t", "0", "0"], ["t", "0.3*sin(t)", "0.2*cos(2*t)"]):
        curve = S.make_curve(coords, 2 * math.pi)
        a = build_patch(build_framed_curve(surf, curve))
        Q = special_ortho_group.rvs(2, random_state=seed)
        b = build_patch(build_framed_curve(surf, curve, rotation=Q))
        s = np.linspace(0, a.length, 501)
        print(f"curve {coords}")
        print(f"  flatness        {np.max(np.abs(flatness_residual(a, s))):.2e}")
        print(f"  tangency        {np.max(tangency_residual(a, s)):.2e}")
        print(f"  box half-widths {np.array2string(a.half_widths, precision=4)}")
        print(f"  rotated frame:  span angle {np.max(span_distance(a.rulings.X, b.rulings.X)):.2e}, "
              f"hausdorff {hausdorff_on_box(a, b, n_s=100, n_u=5):.2e}")


if __name__ == "__main__":
    main()
