"""Flat (developable) approximations of hypersurfaces along curves."""
from .errors import (
    AsymptoticDirectionError,
    DegenerateInputError,
    ExpressionSyntaxError,
    FlatstripError,
    InputError,
    UnsupportedDimensionError,
)
from .exprsurf import eval_jet2, parse_expression
from .flatapprox import RuledPatch, build_patch, flatness_residual, ruling_fields, sigma, tangency_residual
from .frames import FramedCurve, build_framed_curve
from .multicross import cross, gram_det, orthonormalize
from .surface import Hypersurface, cylinder, ellipsoid, graph, make_curve, parametric, plane, sphere, torus

__version__ = "0.1.0"
