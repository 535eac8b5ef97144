"""Exception hierarchy for the degree pipeline.

Every failure mode that callers are expected to handle has a named class.
The CLI maps :class:`MonodegError` subclasses to exit code 2 and input
errors (:class:`ParseError`, :class:`SchemaError`) to exit code 1.
"""

from __future__ import annotations


class MonodegError(Exception):
    """Base class for mathematical / pipeline failures."""


class OperatorDomainError(MonodegError):
    """A point lies outside the effective domain of an operator."""


class DimensionMismatch(MonodegError):
    """Coefficient vectors or sections of incompatible lengths were mixed."""


class UnknownOperator(MonodegError):
    """Requested gallery operator name is not registered."""


class BadParams(MonodegError):
    """Operator or scenario parameters fail validation."""


class RegionUnbounded(MonodegError):
    """A region without a finite bounding box was given to the engine."""


class GridTooFine(MonodegError):
    """A requested covering grid exceeds the cell budget."""


class BoundaryTooClose(MonodegError):
    """Sampled boundary values come too close to the target for a safe degree."""


class DegenerateZero(MonodegError):
    """A located zero has a (numerically) singular Jacobian."""


class BudgetExhausted(MonodegError):
    """Subdivision or iteration budget ran out before certification."""


class ZeroOnBoundarySample(MonodegError):
    """The map vanishes (or nearly so) at a boundary sample point."""


class BoundaryHitsZero(MonodegError):
    """Set values on the boundary contain the target."""


class NotStabilized(MonodegError):
    """The section degrees never produced the required run of equal values."""


class InadmissibleHomotopy(MonodegError):
    """A homotopy loses its uniform boundary margin at some parameter."""


class ResidualNotMet(MonodegError):
    """Zero extraction could not reach the requested inclusion residual."""

    def __init__(self, message: str = "", best_residual: float | None = None):
        super().__init__(message or "residual target not met")
        self.best_residual = best_residual


class HypothesisViolated(MonodegError):
    """A theorem-harness precondition fails on the supplied data."""


class CapSensitive(MonodegError):
    """A result changes when the truncation cap is enlarged."""


class RadiusSearchFailed(MonodegError):
    """No ball radius with the required outward margin was found."""


class ParseError(Exception):
    """Scenario file is not syntactically valid."""


class SchemaError(Exception):
    """Scenario file is valid JSON but violates the schema."""

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))
