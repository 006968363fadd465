class DegenerateCouplingError(ValueError):
    """All three dark-state weights vanish, so the dark state is undefined."""
