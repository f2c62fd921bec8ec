"""Exception hierarchy shared by every module.

The split mirrors how callers must react: `ValidationError` means the request
itself is malformed (CLI exit code 2), everything under `NumericError` means a
well-formed request failed numerically or statistically (CLI exit code 3).
"""

from __future__ import annotations


class PriorImpactError(Exception):
    """Base class for all package errors."""


class ValidationError(PriorImpactError, ValueError):
    """Invalid parameters, domains, or malformed inputs."""


class NumericError(PriorImpactError):
    """A well-formed computation failed numerically or statistically."""


class ImproperPosteriorError(NumericError):
    """The posterior implied by prior + data is not a proper distribution."""


class IntegrationError(NumericError):
    """Adaptive quadrature did not converge within the refinement budget."""

    def __init__(self, message: str, achieved_tolerance: float | None = None):
        super().__init__(message)
        self.achieved_tolerance = achieved_tolerance


class DivergenceError(NumericError):
    """An expectation diverged or an iterative solver failed to converge."""


class SamplerError(NumericError):
    """MCMC failure (e.g. every chain stuck); carries diagnostics when known."""

    def __init__(self, message: str, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics


class CapacityError(ValidationError):
    """An exact computation would exceed a configured resource cap."""
