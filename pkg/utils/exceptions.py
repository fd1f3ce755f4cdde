"""
Custom exception hierarchy for popdyn.

The hierarchy separates three failure families that the command line maps to
distinct exit codes: configuration problems, numerical failures and violated
theorem hypotheses.
"""

from typing import Optional, Sequence


class PopdynError(Exception):
    """Base class for all application-specific errors."""
    pass


class ConfigurationError(PopdynError):
    """Raised when there are configuration-related issues."""
    pass


class ScenarioError(ConfigurationError):
    """Raised when a scenario file cannot be read or fails schema validation."""

    def __init__(self, source: str, reason: str = None):
        self.source = source
        self.reason = reason

        message = f"Invalid scenario '{source}'"
        if reason:
            message += f": {reason}"

        super().__init__(message)


class ParameterError(ConfigurationError):
    """Raised when a model parameter violates its admissible range."""

    def __init__(self, name: str, value, requirement: str):
        self.name = name
        self.value = value
        self.requirement = requirement
        super().__init__(f"Parameter {name}={value!r} must satisfy {requirement}")


class DimensionMismatchError(ConfigurationError):
    """Raised when a state vector does not match the model dimension."""

    def __init__(self, expected: int, received: int):
        self.expected = expected
        self.received = received
        super().__init__(f"State has dimension {received}, model expects {expected}")


class UnsupportedModelError(ConfigurationError):
    """Raised when an operation is requested for a model family that lacks it."""

    def __init__(self, operation: str, family: str):
        self.operation = operation
        self.family = family
        super().__init__(f"Operation '{operation}' is not available for model family '{family}'")


class NumericalError(PopdynError):
    """Base class for failures of a numerical procedure."""
    pass


class IntegrationError(NumericalError):
    """Raised when the ODE solver cannot continue."""

    def __init__(self, message: str, t: Optional[float] = None):
        self.t = t
        if t is not None:
            message = f"{message} (t={t:.6g})"
        super().__init__(message)


class NegativeStateError(IntegrationError):
    """Raised when a population overshoots below zero by more than the tolerance."""

    def __init__(self, t: float, value: float, tolerance: float):
        self.value = value
        self.tolerance = tolerance
        super().__init__(
            f"Population became negative ({value:.3e}) beyond abs_tol {tolerance:.1e}", t=t
        )


class NonFiniteStateError(IntegrationError):
    """Raised when the state contains NaN or infinite entries."""

    def __init__(self, t: float):
        super().__init__("Non-finite state encountered", t=t)


class ConvergenceError(NumericalError):
    """Raised when an iterative solver does not converge."""

    def __init__(self, what: str, iterations: int = None, residual: float = None):
        self.what = what
        self.iterations = iterations
        self.residual = residual

        message = f"{what} did not converge"
        if iterations is not None:
            message += f" after {iterations} iterations"
        if residual is not None:
            message += f" (residual {residual:.3e})"

        super().__init__(message)


class GrowthLimitError(NumericalError):
    """Raised when a growth function has no finite limit where one is required."""

    def __init__(self, kind: str, quantity: str):
        self.kind = kind
        self.quantity = quantity
        super().__init__(f"Growth function '{kind}' has no finite {quantity}")


class NotAnEquilibriumError(NumericalError):
    """Raised when a point passed as an equilibrium has a large vector-field residual."""

    def __init__(self, point: Sequence[float], residual: float, tolerance: float):
        self.point = tuple(float(v) for v in point)
        self.residual = residual
        self.tolerance = tolerance
        super().__init__(
            f"Point {self.point} is not an equilibrium: residual {residual:.3e} > {tolerance:.1e}"
        )


class EigenpairTrackingError(NumericalError):
    """Raised when a complex eigenvalue pair cannot be followed across a perturbation."""
    pass


class DegenerateGeometryError(NumericalError):
    """Raised for degenerate conics, defective Jacobians and similar singular cases."""
    pass


class EmptyWindowError(NumericalError):
    """Raised when an averaging or regression window contains too few samples."""

    def __init__(self, what: str, samples: int):
        self.what = what
        self.samples = samples
        super().__init__(f"{what}: only {samples} samples in window")


class NoPositiveEquilibriumError(NumericalError):
    """Raised when a required positive equilibrium does not exist."""
    pass


class NoReturnError(NumericalError):
    """Raised when a trajectory does not return to a Poincare section."""
    pass


class TheoremPreconditionError(PopdynError):
    """Raised when a closed-form result is requested outside its hypotheses."""

    def __init__(self, condition: str, lhs: float = None, rhs: float = None):
        self.condition = condition
        self.lhs = lhs
        self.rhs = rhs

        message = f"Hypothesis violated: {condition}"
        if lhs is not None and rhs is not None:
            message += f" (lhs={lhs:.6g}, rhs={rhs:.6g})"

        super().__init__(message)
