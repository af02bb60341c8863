"""Exception hierarchy shared by every module."""


class PfrmtError(Exception):
    """Base class for all library errors."""


class DimensionError(PfrmtError, ValueError):
    pass


class NumericError(PfrmtError, ValueError):
    pass


class SingularMatrixError(PfrmtError, ArithmeticError):
    def __init__(self, message, rcond=None):
        super().__init__(message)
        self.rcond = rcond


class DegenerateShiftError(PfrmtError, ValueError):
    pass


class OnSupportError(PfrmtError, ValueError):
    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class UnsupportedReductionError(PfrmtError, ValueError):
    pass


class DivergentMomentError(PfrmtError, ArithmeticError):
    pass


class BreakdownError(PfrmtError, ArithmeticError):
    def __init__(self, message, step):
        super().__init__(message)
        self.step = step


class RegimeError(PfrmtError, ValueError):
    pass


class BudgetError(PfrmtError, RuntimeError):
    pass


class UnsupportedOracleError(PfrmtError, ValueError):
    pass


class ConfigError(PfrmtError, ValueError):
    """Invalid run configuration; ``field`` is the offending JSON path."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field
