"""Exception types raised across the package."""


class SpaceMismatchError(ValueError):
    """Two objects were expected to live on the same atomic space."""


class DimensionMismatchError(ValueError):
    """Vector, functional or matrix shapes are incompatible."""


class UnboundedFunctionError(ValueError):
    """A function without a global bound was integrated over a truncated space."""


class NonNormalError(ValueError):
    """Raised when a matrix fails the normality test.

    The measured defect ``||T T^H - T^H T||_2`` is kept on ``defect``.
    """

    def __init__(self, defect, threshold):
        super().__init__(
            f"matrix is not normal: defect {defect:.3e} exceeds {threshold:.3e}"
        )
        self.defect = defect
        self.threshold = threshold


class InvalidMeasureError(ValueError):
    """Constructor inputs violate a measure, state or POVM invariant."""
