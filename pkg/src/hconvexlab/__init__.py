"""Numerical verification and falsification lab for conditionally convex bounds."""

__version__ = "0.1.0"

from .errors import (
    HConvexLabError, DomainError, InfeasibleGate, SingularQuotient,
    ConvergenceError, SpectrumDomainError, DimensionMismatch, EmptyRegion,
    PrecisionUnavailable, ConfigError,
)
from .funclib import (
    Interval, interval, GateInterval, ScalarFunction, scalar_function,
    evaluate, evaluate_array, gate_interval, Triple, make_triple,
    TRIPLE_NAMES, FAMILY_NAMES,
)
