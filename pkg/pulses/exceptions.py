class UnsupportedShapeError(ValueError):
    pass
