class DimensionMismatchError(ValueError):
    pass


class LabelMismatchError(ValueError):
    pass


class NonHermitianError(ValueError):
    pass


class NormalizationError(ValueError):
    pass


class PropagationError(ArithmeticError):
    """Raised when the generator or the propagated state stops being finite."""
