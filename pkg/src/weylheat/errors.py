"""Exception hierarchy for weylheat."""


class WeylHeatError(Exception):
    """Base class for all weylheat errors."""


class DominanceError(WeylHeatError):
    """Coordinates are not weakly decreasing (not in the closed chamber)."""


class DegenerateInput(WeylHeatError):
    """Coordinates coincide (or nearly coincide) where strict dominance is required."""


class RankTooLarge(WeylHeatError):
    """Requested rank exceeds the configured cap for Weyl-group enumeration."""


class QuadratureNonconvergence(WeylHeatError):
    """Adaptive quadrature ladder was exhausted before reaching the tolerance."""


class ToleranceUnachievable(WeylHeatError):
    """The requested accuracy cannot be met for this input."""


class PreconditionViolated(WeylHeatError):
    """An operation-specific precondition does not hold for the given input."""


class CalibrationError(WeylHeatError):
    """A calibrated constant failed its internal consistency check."""
