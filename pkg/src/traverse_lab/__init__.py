"""Traversing flows on planar domains, their boundary causality maps, and billiards."""

__version__ = "0.1.0"

from .errors import (Ambiguous, ConfigError, Degenerate, DomainError, IllConditioned,  # noqa: E402
                     MonotonicityViolation, NoExit, NoTangent, NotInDomain, ParseError,
                     TimeBudgetExceeded, TraverseLabError)
from .field_expr import VectorField, parse  # noqa: E402
from .flow_sim import Domain2D, strata, trace_trajectory  # noqa: E402
from .omega import OmegaWord  # noqa: E402

__all__ = [
    "Ambiguous", "ConfigError", "Degenerate", "Domain2D", "DomainError", "IllConditioned",
    "MonotonicityViolation", "NoExit", "NoTangent", "NotInDomain", "OmegaWord", "ParseError",
    "TimeBudgetExceeded", "TraverseLabError", "VectorField", "parse", "strata", "trace_trajectory",
]
