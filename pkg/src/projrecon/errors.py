"""Exception types shared across the package."""


class ProjReconError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatchError(ProjReconError, ValueError):
    """Operands live in incompatible ambient or projected dimensions."""


class DuplicatePointsError(ProjReconError, ValueError):
    """Two support points are closer than the deduplication tolerance."""


class NonpositiveWeightError(ProjReconError, ValueError):
    """A weight is zero, negative, or not finite."""


class WeightSumMismatchError(ProjReconError, ValueError):
    """Weights do not sum to one within tolerance."""


class RankDeficientError(ProjReconError, ValueError):
    """A projection matrix is numerically rank deficient."""


class TupleBudgetExceededError(ProjReconError, RuntimeError):
    """Exhaustive tuple enumeration would exceed the configured cap."""


class InfeasibleError(ProjReconError, RuntimeError):
    """The weight polytope is empty; the true weights are always feasible,
    so this signals a tolerance failure upstream."""


class SupercriticalRegimeError(ProjReconError, ValueError):
    """A null-distance witness was requested with more directions than
    ambient dimensions, where none exists."""


class DegenerateInstanceError(ProjReconError, ValueError):
    """The requested construction collapses (e.g. single-atom critical case)."""


class InvalidOrderError(ProjReconError, ValueError):
    """Polygon order below the minimum of three."""


class ConfigError(ProjReconError, ValueError):
    """Configuration inconsistent with the requested operation."""
