"""Exception types shared across the simulator."""


class CbwcsError(Exception):
    """Base class for simulator errors."""


class InvalidInputError(CbwcsError, ValueError):
    pass


class SingularMatrixError(CbwcsError, ArithmeticError):
    pass


class NotTrainedError(CbwcsError, RuntimeError):
    pass


class EstimationFailedError(CbwcsError, ArithmeticError):
    pass


class DesignFailedError(CbwcsError, ArithmeticError):
    pass


class MisconfigurationError(CbwcsError, ValueError):
    pass


class UnsupportedParametersError(CbwcsError, ValueError):
    pass


class CostConsistencyError(CbwcsError, AssertionError):
    pass


class ExperimentError(CbwcsError, RuntimeError):
    """Wraps a failure with the frame index and grid point it happened at."""

    def __init__(self, message, frame=None, ebn0_db=None):
        super().__init__(message)
        self.frame = frame
        self.ebn0_db = ebn0_db
