"""Exception types raised across the package.

Validation errors carry the offending channel index where one exists so
that config-level diagnostics can point at the right entry.
"""


class ProblemValidationError(ValueError):
    """Base class for problem-data validation failures."""

    def __init__(self, message, channel=None):
        super().__init__(message)
        self.channel = channel


class NonSymmetric(ProblemValidationError):
    """A matrix required to be symmetric is not, beyond tolerance."""


class NotPositiveDefinite(ProblemValidationError):
    """A matrix required to be positive definite has a nonpositive eigenvalue."""


class DimensionMismatch(ProblemValidationError):
    """Array shapes are inconsistent with the problem dimension."""


class NonPositiveWeight(ProblemValidationError):
    """A channel weight is zero or negative."""


class NegativeRadius(ProblemValidationError):
    """The divergence-ball radius is negative."""


class SingularSum(ValueError):
    """Factorization of a covariance sum failed; signals numerical breakdown."""


class SingularReference(ValueError):
    """Factorization of the reference covariance failed."""


class LostPositiveDefiniteness(ArithmeticError):
    """The inverse-form iteration matrix lost positive definiteness.

    For the upper bound this signals that alpha lies beyond the feasible
    range; the outer search catches it and shrinks the bracket.
    """

    def __init__(self, alpha, iteration):
        super().__init__(
            f"iteration matrix not positive definite at alpha={alpha!r} "
            f"(inner iteration {iteration})"
        )
        self.alpha = alpha
        self.iteration = iteration


class NoConvergence(ArithmeticError):
    """An iteration hit its cap before reaching tolerance."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class BracketFailure(ArithmeticError):
    """The KL gap never reached the requested radius before losing PD.

    Reported with the largest feasible alpha found and the KL attained
    there, so callers can see how far the requested epsilon overshoots the
    reachable range.
    """

    def __init__(self, direction, epsilon, alpha_feasible, kl_feasible):
        super().__init__(
            f"cannot bracket {direction} bound at epsilon={epsilon!r}: "
            f"largest feasible alpha {alpha_feasible!r} reaches KL "
            f"{kl_feasible!r} < epsilon"
        )
        self.direction = direction
        self.epsilon = epsilon
        self.alpha_feasible = alpha_feasible
        self.kl_feasible = kl_feasible


class FisherUndefined(ValueError):
    """The prior has no finite Fisher information."""


class DegenerateSample(ValueError):
    """Sample covariance is numerically singular."""


class DegenerateWeights(ArithmeticError):
    """Importance weights collapsed; the proposal is a bad fit."""

    def __init__(self, message, bad_fraction=None):
        super().__init__(message)
        self.bad_fraction = bad_fraction


class ConfigError(ValueError):
    """A problem config file is malformed or violates the schema."""
