"""Exception types raised across the simulator."""


class IcnrError(Exception):
    """Base class for every error raised by this package."""


class InvalidParameterError(IcnrError, ValueError):
    pass


class DegenerateGeometryError(IcnrError, ValueError):
    """Two points coincide or a view angle collapses to nadir."""


class InsufficientAnchorsError(IcnrError, ValueError):
    pass


class SingularGeometryError(IcnrError, ValueError):
    pass


class ConfigParseError(IcnrError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConfigValidationError(InvalidParameterError):
    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")


class ConfigIOError(IcnrError, OSError):
    pass


class ReportIOError(IcnrError, OSError):
    pass
