"""Exception types shared across the package."""


class QMFormsError(Exception):
    """Base class for all package errors."""


class InvalidWeightError(QMFormsError, ValueError):
    pass


class NotInvertibleError(QMFormsError, ZeroDivisionError):
    pass


class PrecisionError(QMFormsError, ArithmeticError):
    """Requested accuracy cannot be met with the available data."""


class ParseError(QMFormsError, ValueError):
    def __init__(self, message: str, position: int | None = None):
        super().__init__(message if position is None else f"{message} (at position {position})")
        self.position = position


class NotModularError(QMFormsError, ValueError):
    pass


class ConvergenceError(QMFormsError, ArithmeticError):
    pass
