class InvalidInputError(ValueError):
    """Raised when an operation receives arguments that violate its contract."""
