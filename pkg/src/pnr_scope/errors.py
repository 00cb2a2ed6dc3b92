"""Exception hierarchy shared by all pnr_scope modules."""


class PnrScopeError(Exception):
    """Base class for every error raised by pnr_scope."""


class DomainError(PnrScopeError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConfigurationError(PnrScopeError, ValueError):
    """A scan plan, scenario or analysis request is inconsistent."""


class NumericalError(PnrScopeError, ArithmeticError):
    """A root-find, bracket or extremum search failed."""


class NoPeakError(NumericalError):
    """The curve has no positive, non-flat maximum to measure."""
