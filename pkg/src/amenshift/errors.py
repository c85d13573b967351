"""Shared exception types."""


class AmenshiftError(Exception):
    """Base class for library errors."""


class DimensionMismatch(AmenshiftError):
    """Operands live in lattices of different rank."""


class EmptySetError(AmenshiftError):
    """An operation that needs a nonempty set received an empty one."""


class CoverageShortfall(AmenshiftError):
    """Greedy tiler stopped below the requested coverage ratio."""

    def __init__(self, achieved, required):
        self.achieved = achieved
        self.required = required
        super().__init__(
            f"greedy pass reached coverage {float(achieved):.4f} "
            f"< required {float(required):.4f}"
        )


class UnreachableThreshold(AmenshiftError):
    """No index below the configured cap satisfies a decomposition step."""


class ResolutionError(AmenshiftError):
    """Requested scale admits no exact combinatorial resolution window."""

    def __init__(self, epsilon, threshold):
        self.epsilon = epsilon
        self.threshold = threshold
        super().__init__(
            f"epsilon {float(epsilon)} is at or above the floor threshold "
            f"{float(threshold)}; no exact combinatorial mode available"
        )


class GapTooSmall(AmenshiftError):
    """Gluing segments are closer than the SFT transition gap allows."""


class SamplerBudget(AmenshiftError):
    """Rejection sampler exhausted its draw budget."""

    def __init__(self, budget, context=""):
        self.budget = budget
        super().__init__(f"no acceptable pattern within {budget} draws {context}")


class BudgetExceeded(AmenshiftError):
    """An enumeration or DP exceeded its configured size budget."""


class SpecMissing(AmenshiftError):
    """Measure lacks a generating spec needed by the operation."""


class ConfigError(AmenshiftError):
    """Experiment config failed schema validation."""
