"""Exception and warning types raised across the package."""


class DetKDPPError(Exception):
    """Base class for all errors raised by detkdpp."""


class EmptyData(DetKDPPError, ValueError):
    pass


class InvalidBandwidth(DetKDPPError, ValueError):
    pass


class NegativeHistogram(DetKDPPError, ValueError):
    pass


class InvalidKernel(DetKDPPError, ValueError):
    """A precomputed kernel failed validation (shape, symmetry, finiteness)."""


class RankTooLarge(DetKDPPError, ValueError):
    pass


class SingularKernel(DetKDPPError, ValueError):
    pass


class SingularBlock(DetKDPPError, ValueError):
    pass


class NumericalBreakdown(DetKDPPError, ArithmeticError):
    pass


class ConvergenceFailure(DetKDPPError, ArithmeticError):
    def __init__(self, message, iterations=None):
        super().__init__(message)
        self.iterations = iterations


class ConfigError(DetKDPPError, ValueError):
    pass


class DegenerateCutWarning(UserWarning):
    """Eigenvalues at the rank-k cut are (numerically) tied."""


class DegenerateStepWarning(UserWarning):
    """Greedy selection ran out of residual mass before reaching k."""
