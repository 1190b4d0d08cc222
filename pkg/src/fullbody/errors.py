"""Exception hierarchy for the full body simulator."""

from __future__ import annotations


class FullBodyError(Exception):
    """Base class for all errors raised by this package."""


class NonSkewInput(FullBodyError, ValueError):
    pass


class NonSymmetricInput(FullBodyError, ValueError):
    pass


class NotARotation(FullBodyError, ValueError):
    pass


class NonPositiveMass(FullBodyError, ValueError):
    pass


class SingularInertia(FullBodyError, ValueError):
    pass


class InvalidPhysicalUnits(FullBodyError, ValueError):
    pass


class ConfigError(FullBodyError, ValueError):
    pass


class StepError(FullBodyError):
    """An error that can be attributed to a particular integration step.

    ``step`` is filled in by the run loop when the failure surfaces, so the
    CLI can report where a trajectory broke down.
    """

    step: int | None = None


class BodiesOverlap(StepError):
    def __init__(self, separation: float, min_separation: float):
        super().__init__(
            f"point-mass separation {separation:.3e} below gate {min_separation:.3e}"
        )
        self.separation = separation
        self.min_separation = min_separation


class SolverError(StepError):
    pass


class NoConvergence(SolverError):
    def __init__(self, iterations: int, residual: float, reason: str = ""):
        msg = f"Newton solve failed after {iterations} iterations (residual {residual:.3e})"
        if reason:
            msg += f": {reason}"
        super().__init__(msg)
        self.iterations = iterations
        self.residual = residual


class SingularJacobian(SolverError):
    pass
