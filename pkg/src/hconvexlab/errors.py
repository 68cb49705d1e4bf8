"""Semantic exception hierarchy shared by all modules."""


class HConvexLabError(Exception):
    """Base class for all library errors."""


class DomainError(HConvexLabError):
    """A scalar function was evaluated outside its domain or at a singularity."""


class InfeasibleGate(HConvexLabError):
    """The gate value exceeds the anchor point: g(v) > v."""


class SingularQuotient(HConvexLabError):
    """The Jensen-coefficient quotient h(t)/t is singular: 0 lies inside K with h(0) != 0."""


class ConvergenceError(HConvexLabError):
    """An iterative solver hit its sweep cap before reaching tolerance."""


class SpectrumDomainError(DomainError):
    """Some eigenvalue lies outside the scalar function's domain."""

    def __init__(self, message, offending=()):
        super().__init__(message)
        self.offending = tuple(offending)


class DimensionMismatch(HConvexLabError):
    """Operands have incompatible dimensions."""


class EmptyRegion(HConvexLabError):
    """Feasibility rejected every draw of a sampling campaign."""

    def __init__(self, message, drawn=0, rejected=0):
        super().__init__(message)
        self.drawn = drawn
        self.rejected = rejected


class PrecisionUnavailable(HConvexLabError):
    """A required function has no high-precision evaluation path."""


class ConfigError(HConvexLabError):
    """A run configuration is malformed (unknown key, missing field, bad value)."""
