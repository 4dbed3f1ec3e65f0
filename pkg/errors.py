"""
Exception hierarchy for gapscope.
Usage errors map to exit code 2, computational inconsistencies to exit code 1.
"""

from typing import Optional


class GapscopeError(Exception):
    """Base class for every error raised by gapscope."""

    exit_code = 1


class UsageError(GapscopeError):
    """Invalid input supplied by the caller."""

    exit_code = 2

    def __init__(self, message: str, flag: Optional[str] = None):
        super().__init__(message)
        self.flag = flag


class DomainError(UsageError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class ConfigError(UsageError):
    """Configuration value rejected while building a RunConfig."""


class InsufficientDataError(UsageError, ValueError):
    """Too few convergents for an estimate."""


class ConvergentIndexError(UsageError, IndexError):
    """Convergent index outside the stored range."""


class ResolutionError(GapscopeError):
    """Sampling too coarse for the requested quantity."""


class SingularConjugationError(GapscopeError):
    """Conjugation map is not invertible at some sample."""


class InconsistencyError(GapscopeError):
    """A computed result violates an invariant it must satisfy."""

    def __init__(self, message: str, invariant: str):
        super().__init__(f"{message} [invariant: {invariant}]")
        self.invariant = invariant


class GapInconsistencyError(InconsistencyError):
    """IDS varies inside an interval claimed to be a gap."""

    def __init__(self, message: str):
        super().__init__(message, invariant='ids-constant-on-gaps')


class NoLabelError(InconsistencyError):
    """No label k with |k| <= k_max matches an IDS value."""

    def __init__(self, message: str):
        super().__init__(message, invariant='gap-labelling')


class AmbiguousLabelError(InconsistencyError):
    """Two labels match an IDS value equally well."""

    def __init__(self, message: str):
        super().__init__(message, invariant='label-uniqueness')


class ResonantModeError(InconsistencyError):
    """A mode handed to a homological solve violates the divisor floor."""

    def __init__(self, message: str, modes=()):
        super().__init__(message, invariant='divisor-floor')
        self.modes = tuple(modes)


class SmallnessGateError(UsageError, ValueError):
    """Perturbation too large for a single Newton step."""
