"""
LIE Lab errors - Exception hierarchy for the filament laboratory.

Every error raised on purpose by the package derives from LieLabError, so
callers (the CLI, the experiment suites) can separate expected failures from
programming mistakes.
"""


class LieLabError(Exception):
    """Base class for all lie_lab errors."""


class GridError(LieLabError, ValueError):
    """Invalid grid, or a grid that does not match the data placed on it."""


class DegenerateInputError(LieLabError, ValueError):
    """Input for which the requested construction is undefined."""


class AdmissibilityError(LieLabError, ValueError):
    """Perturbation violating the admissibility assumptions."""


class ConstantsUnavailableError(LieLabError, ValueError):
    """Explicit stability constants requested outside their range (angle >= pi)."""


class InitialConditionError(LieLabError, ValueError):
    """Initial curve inconsistent with the boundary condition."""


class BlowUpError(LieLabError, RuntimeError):
    """Non-finite state encountered during time stepping."""

    def __init__(self, step_index: int, time: float, detail: str = ""):
        self.step_index = step_index
        self.time = time
        message = f"non-finite coordinates at step {step_index} (t={time:.6g})"
        if detail:
            message = f"{message}: {detail}"
        super().__init__(message)


class ReflectivityError(LieLabError, ValueError):
    """Ring data that cannot be split into reflective segments."""


class ConfigError(LieLabError, ValueError):
    """Unreadable or invalid run configuration."""
