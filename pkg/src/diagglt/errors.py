"""Exception hierarchy."""


class DiagGLTError(Exception):
    """Base class for all errors raised by the package."""


class RealnessError(DiagGLTError, ValueError):
    """A real-valued input was required but complex values were given."""


class SizeError(DiagGLTError, ValueError):
    """Matrix size is zero or exceeds a configured cap."""


class ShapeError(DiagGLTError, ValueError):
    """Non-square input or mismatched sizes."""


class ExtractionError(DiagGLTError):
    """Diagonal extraction could not certify the Cauchy level ``k``."""

    def __init__(self, message, level=None):
        super().__init__(message)
        self.level = level


class ConstructionError(DiagGLTError):
    """Approximant schedule stalled before reaching the requested level."""

    def __init__(self, message, level=None):
        super().__init__(message)
        self.level = level


class PreconditionError(DiagGLTError):
    """A check's hypothesis failed; ``report`` holds the failing report."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ExprSyntaxError(DiagGLTError, ValueError):
    """Malformed symbol expression; ``offset`` is the byte offset of the problem."""

    def __init__(self, message, offset):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnknownIdentifierError(ExprSyntaxError):
    """Identifier that is neither a variable, a function nor ``pi``."""

    def __init__(self, name, offset):
        super().__init__(f"unknown identifier {name!r}", offset)
        self.name = name
