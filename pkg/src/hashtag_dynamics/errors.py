class DataError(ValueError):
    """Input data is missing, empty or malformed beyond recovery."""


class InvariantError(RuntimeError):
    """An internal consistency check failed."""
