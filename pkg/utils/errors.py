"""Exception hierarchy shared by the model, the evaluators and the CLI."""
import math
from typing import Optional


class DecayLabError(Exception):
    """Base class for every error raised by the laboratory."""


class DomainError(DecayLabError, ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class ConfigError(DecayLabError):
    """A run configuration could not be assembled."""


class InsufficientData(DecayLabError):
    """Too few usable points for a fit."""


class ConvergenceFailure(DecayLabError):
    """
    The quadrature panel budget ran out before the error estimate met its target.
    Carries the best value reached so far, its error estimate, and the grid index
    when raised from a series evaluation.
    """

    def __init__(self, message: str, value: complex = complex(math.nan, math.nan),
                 error_estimate: float = math.inf, index: Optional[int] = None):
        super().__init__(message)
        self.value = value
        self.error_estimate = error_estimate
        self.index = index

    def at_index(self, index: int) -> "ConvergenceFailure":
        return ConvergenceFailure(f"grid point {index}: {self}", self.value,
                                  self.error_estimate, index)


class IllConditioned(DecayLabError):
    """The amplitude is too close to zero for the ratio dA/A to be trusted."""

    def __init__(self, tau: float, modulus: float, error_estimate: float):
        super().__init__(
            f"|A| = {modulus:.3e} at tau = {tau:g} is within "
            f"10x its error estimate {error_estimate:.3e}"
        )
        self.tau = tau
        self.modulus = modulus
        self.error_estimate = error_estimate
