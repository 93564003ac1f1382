"""
errors.py - Exception hierarchy for mtppower

Every error raised by the library derives from MtpPowerError, which itself is a
ValueError so that callers written against plain ValueError keep working.

Changes:
- Initial implementation of the exception hierarchy
- Added SchemaError with optional line information for study/table files
- Added Unreachable for the sample-size search
"""


class MtpPowerError(ValueError):
    """Base class for all mtppower errors."""


class DomainError(MtpPowerError):
    """An argument lies outside the domain of a function (e.g. p not in (0,1))."""


class DimensionMismatch(MtpPowerError):
    """Vector and matrix dimensions do not agree."""


class NotPositiveDefinite(MtpPowerError):
    """A Cholesky pivot fell at or below the positive-definiteness floor."""

    def __init__(self, pivot_index, pivot_value, floor):
        self.pivot_index = pivot_index
        self.pivot_value = pivot_value
        self.floor = floor
        super().__init__(
            f"Matrix is not positive definite: pivot {pivot_index} = {pivot_value:.3e} "
            f"is not above the floor {floor:.1e}"
        )


class ZeroTailWeight(MtpPowerError):
    """Weighted Holm needed a rank whose remaining weight mass is zero."""


class AllZeroPower(MtpPowerError):
    """Every predictive marginal power is zero, so no p-value weights exist."""


class MissingObservedP(MtpPowerError):
    """A test needed an observed p-value but none was supplied."""


class Unreachable(MtpPowerError):
    """The target marginal power is not reached within the search bracket."""

    def __init__(self, message, best_kappa=None, best_power=None):
        self.best_kappa = best_kappa
        self.best_power = best_power
        super().__init__(message)


class ConfigError(MtpPowerError):
    """Invalid power-study configuration."""


class SchemaError(MtpPowerError):
    """
    Invalid study file or p-value table.

    Args:
        message (str): What is wrong
        line (int, optional): 1-based line number in the source file
        source (str, optional): Path or name of the source file
    """

    def __init__(self, message, line=None, source=None):
        self.line = line
        self.source = source
        where = ""
        if source is not None:
            where = f"{source}"
        if line is not None:
            where = f"{where}:{line}" if where else f"line {line}"
        super().__init__(f"{where}: {message}" if where else message)
