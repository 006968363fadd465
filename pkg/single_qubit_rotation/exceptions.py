class InfeasibleDesignError(ValueError):
    """No Rabi pulse with the requested pulse-area index realizes the rotation angle."""
