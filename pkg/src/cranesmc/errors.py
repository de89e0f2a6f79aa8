"""Exception hierarchy shared across the package."""


class CraneError(Exception):
    """Base class for all package-specific errors."""


class DomainError(CraneError, ValueError):
    """A physical or configuration value is outside its valid domain."""


class SingularMatrixError(CraneError):
    """A linear solve hit a pivot (or determinant) below tolerance."""


class IntegrationError(CraneError):
    """A plant integration step produced an invalid state."""


class ScenarioError(CraneError, ValueError):
    """A scenario file or override is malformed or inconsistent."""


class SimulationFault(CraneError, RuntimeError):
    """A closed-loop run aborted (non-finite state, fault budget, ...)."""
