"""Exception types raised across the package."""


class QuadCableError(Exception):
    """Base class for all errors raised by quadcable."""


class NotSkew(QuadCableError, ValueError):
    pass


class SingularMassMatrix(QuadCableError, ArithmeticError):
    pass


class NonFinite(QuadCableError, ArithmeticError):
    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class DegenerateThrust(QuadCableError, ValueError):
    pass


class HeadingParallel(QuadCableError, ValueError):
    pass


class C3TooLarge(QuadCableError, ValueError):
    pass


class ParseError(QuadCableError, ValueError):
    def __init__(self, message, line=None, field=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        if where:
            message = f"{', '.join(where)}: {message}"
        super().__init__(message)
        self.line = line
        self.field = field


class ValidationError(QuadCableError, ValueError):
    def __init__(self, message, field=None):
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)
        self.field = field
