"""Exception types shared across the package."""


class NumericFailure(RuntimeError):
    """A root finder or refinement loop did not converge.

    ``bracket`` holds the (lo, hi) arrays at the moment of failure so callers
    can inspect how far the search got.
    """

    def __init__(self, message, bracket=None):
        super().__init__(message)
        self.bracket = bracket
        self.orbit_index = None


class BreakpointQueryError(ValueError):
    """Derivative requested exactly at a break point of a piecewise-affine map."""

    def __init__(self, x, right, left):
        super().__init__(f"derivative undefined at break point {x}: Df+={right}, Df-={left}")
        self.x = x
        self.right = right
        self.left = left


class UnsupportedVariantError(TypeError):
    """The operation is not defined for this kind of map."""


class ConstructionError(ValueError):
    """Parameters do not define a valid diffeomorphism."""


class ResourceLimitError(RuntimeError):
    """A configured cap (break points, box size, ...) would be exceeded."""


class CommutativityError(ValueError):
    """Generators handed to the box conjugator do not commute."""


class UncertifiedHorizonWarning(UserWarning):
    """A complete-jump scan could not certify that its orbit window was long enough."""
