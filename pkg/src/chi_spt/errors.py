"""Exception hierarchy shared across the package."""


class ChiError(Exception):
    """Base class for all package errors."""


class ConfigError(ChiError):
    """Malformed system definition. Carries an optional 1-based line/column."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        loc = ""
        if line is not None:
            loc = f"line {line}"
            if column is not None:
                loc += f", column {column}"
            loc += ": "
        super().__init__(loc + message)
        self.message = message


class ExprSyntaxError(ConfigError):
    pass


class UnknownIdentifierError(ConfigError):
    pass


class DimensionError(ChiError, ValueError):
    pass


class AssumptionError(ChiError):
    """Raised when a standing assumption is violated at construction."""


class NonFiniteError(ChiError, ArithmeticError):
    def __init__(self, message, index=None):
        self.index = index
        super().__init__(message if index is None else f"{message} (index {index})")


class DivergenceError(ChiError):
    def __init__(self, message, index=None, norm=None):
        self.index = index
        self.norm = norm
        super().__init__(message if index is None else f"{message} (index {index})")


class SolverError(ChiError):
    """Manifold solve failure. ``index`` is set when raised along a trajectory."""

    def __init__(self, message, index=None):
        self.index = index
        super().__init__(message if index is None else f"{message} (index {index})")


class ConvergenceError(SolverError):
    pass


class SingularJacobianError(SolverError):
    pass


class FitError(ChiError):
    pass


class CertificateError(ChiError):
    pass
