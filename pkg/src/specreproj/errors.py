"""Exception hierarchy shared by the package."""


class ConfigError(ValueError):
    """Invalid configuration (grid size, Gegenbauer parameters, scenario fields)."""

    def __init__(self, message, field=None):
        self.field = field
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)


class NumericalError(ArithmeticError):
    """A numerical routine failed (non-convergence, NaN, singular system)."""


class NotSPDError(NumericalError):
    """Cholesky factorization hit a non-positive pivot."""

    def __init__(self, pivot, value=None):
        self.pivot = pivot
        self.value = value
        msg = f"matrix is not positive definite: non-positive pivot at index {pivot}"
        if value is not None:
            msg += f" (value {value:.3e})"
        super().__init__(msg)
