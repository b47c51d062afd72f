"""Exception hierarchy shared by all flatstrip modules."""


class FlatstripError(Exception):
    """Base class for every error raised by this package."""


class InputError(FlatstripError, ValueError):
    """Malformed or dimensionally inconsistent input."""


class DegenerateInputError(InputError):
    """Vectors that should be independent are (numerically) dependent."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class ExpressionSyntaxError(InputError):
    def __init__(self, message, offset):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnknownIdentifierError(ExpressionSyntaxError):
    def __init__(self, name, offset):
        super().__init__(f"unknown identifier {name!r}", offset)
        self.name = name


class ArityError(ExpressionSyntaxError):
    pass


class EvaluationError(FlatstripError, ArithmeticError):
    """Domain violation while evaluating an expression (log of 0, x/0, ...)."""

    def __init__(self, message, offset=None):
        where = "" if offset is None else f" (expression offset {offset})"
        super().__init__(message + where)
        self.offset = offset


class DegenerateChartError(FlatstripError):
    """The chart map fails to be an immersion at the queried point."""


class DegenerateCurveError(FlatstripError):
    """The curve is singular (zero velocity) or leaves the chart domain."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class RefineGridError(FlatstripError):
    """Frame propagation needs a finer parameter grid."""


class AsymptoticDirectionError(FlatstripError):
    """The curve becomes tangent to an asymptotic direction of the surface.

    ``t`` is the first offending value of the original curve parameter,
    ``s`` the corresponding arc length and ``tau1`` the normal curvature there.
    """

    def __init__(self, t, s, tau1, threshold):
        super().__init__(
            f"curve is parallel to an asymptotic direction at t={t:.12g} "
            f"(|tau_1|={abs(tau1):.3e} < {threshold:.3e}); the construction "
            "requires the curve never to be parallel to an asymptotic direction"
        )
        self.t = t
        self.s = s
        self.tau1 = tau1
        self.threshold = threshold


class PatchDomainError(FlatstripError, ValueError):
    """Ruling parameter outside the admissible box, or t outside the curve."""


class DegeneratePatchError(FlatstripError):
    """The ruled patch is not immersive where it was asked to be."""


class UnsupportedDimensionError(FlatstripError):
    pass


class SceneError(InputError):
    """Scene file failed to load or validate."""
