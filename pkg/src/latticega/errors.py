class ConfigurationError(ValueError):
    """Invalid operator or run configuration (bad n_p, empty pool, missing file...)."""


class InitializationError(RuntimeError):
    """A problem could not produce a feasible starting population."""
