"""Exception and warning types raised across the package."""


class OjaStreamError(Exception):
    """Base class for all library errors."""


class ZeroVector(OjaStreamError, ArithmeticError):
    pass


class DimensionMismatch(OjaStreamError, ValueError):
    pass


class NoConvergence(OjaStreamError, ArithmeticError):
    pass


class DegenerateGap(OjaStreamError, ValueError):
    """The eigengap lambda1 - lambda2 is not strictly positive."""


class BadAlpha(OjaStreamError, ValueError):
    pass


class InsufficientSamples(OjaStreamError, ValueError):
    pass


class NonpositiveQ(OjaStreamError, ArithmeticError):
    """The convergence-rate bound is vacuous for this step-size sequence."""


class SingularDenominator(OjaStreamError, ArithmeticError):
    pass


class HypothesisViolated(OjaStreamError, ValueError):
    """A step size exceeds the cap a lemma assumes."""


class EmptyBlock(OjaStreamError, ValueError):
    pass


class ReplayFormatError(OjaStreamError, ValueError):
    pass


class ConfigError(OjaStreamError, ValueError):
    pass


class MaxIterExceeded(RuntimeWarning):
    """Weiszfeld iteration hit its cap; the best iterate so far is returned."""
