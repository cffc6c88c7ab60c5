"""Exception classes shared across the package."""


class DimensionError(ValueError):
    """Matrix shapes are incompatible with the requested operation."""


class GuardError(ValueError):
    """A size/feasibility guard was exceeded (exhaustive routines only scale so far)."""


class PreconditionError(ValueError):
    """A documented precondition of an audit or verifier routine was violated."""


class ClaimViolationError(RuntimeError):
    """A structural bound that should always hold was breached.

    Raised instead of silently passing: a violation here would falsify one of
    the combinatorial claims the verifier is meant to check mechanically.
    """


class CertificateError(RuntimeError):
    """A mate certificate failed re-verification."""


class FormatError(ValueError):
    """Malformed serialized input (graph6 string, fraction matrix text, JSON)."""
