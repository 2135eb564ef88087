"""Exception hierarchy shared by the solver, simulators and CLI."""


class FlipInError(Exception):
    """Base class for all package errors."""


class DomainError(FlipInError, ValueError):
    """An input lies outside the domain of an operation."""


class EdgeCaseRoutingError(DomainError):
    """Beliefs sit on an edge of the type simplex; an edge-case solver applies."""

    def __init__(self, message, solver):
        super().__init__(message)
        self.solver = solver


class HypothesisViolation(DomainError):
    """A parametric hypothesis required by a result does not hold."""


class InternalConsistencyError(FlipInError):
    """More than one closed-form branch claims the same parameter set."""

    def __init__(self, message, branches=()):
        super().__init__(message)
        self.branches = tuple(branches)


class NoEquilibriumError(FlipInError):
    """No closed-form equilibrium branch applies to the requested configuration."""


class ConfigError(FlipInError):
    """A configuration document is malformed or incomplete."""
