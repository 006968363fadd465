class BoundaryLeakageError(ArithmeticError):
    """A requested level does not decay before the edge of the flux grid."""


class EigensolverError(ArithmeticError):
    pass


class NoDoubleWellError(ValueError):
    pass


class NoExcitedLevelError(ValueError):
    pass
