"""Exception hierarchy shared by every convexcert module."""


class CertError(Exception):
    """Base class for all convexcert errors."""


class DimensionError(CertError, ValueError):
    def __init__(self, left, right, what="operands"):
        self.left = left
        self.right = right
        super().__init__(f"dimension mismatch between {what}: {left} != {right}")


class RangeError(CertError, ValueError):
    """A scalar parameter lies outside its admissible interval."""


class DomainError(CertError, ValueError):
    """Evaluation point lies outside a function's domain box."""

    def __init__(self, message, coordinate=None):
        self.coordinate = coordinate
        super().__init__(message)


class BoundaryError(DomainError):
    """Point too close to the domain boundary for a finite-difference stencil."""


class ConfigError(CertError):
    pass


class BracketError(CertError):
    pass


class InapplicableInstance(CertError):
    """An instance does not satisfy the precondition of the check applied to it."""


class SpecError(CertError, ValueError):
    """Malformed function specification; ``pos`` is a 0-based character offset."""

    def __init__(self, message, text=None, pos=None):
        self.text = text
        self.pos = pos
        if text is not None and pos is not None:
            message = f"{message} (at position {pos})\n  {text}\n  {' ' * pos}^"
        super().__init__(message)
