"""Exception and warning classes shared across the package."""
from __future__ import annotations


class ParameterError(ValueError):
    """Invalid parameters for a weight, domain, multiplier or experiment."""


class RangeError(ValueError):
    """A shift is too large for the truncated line domain."""


class ResolutionError(ValueError):
    """A frequency bound is not representable on the grid."""


class DivergenceError(ArithmeticError):
    """An integral or series that must converge does not."""


class ConfigError(ValueError):
    """Experiment config failed to parse or validate.

    ``field`` is the dotted path of the offending entry and ``line`` its
    1-based line in the source file, when known.
    """

    def __init__(self, msg: str, field: str | None = None, line: int | None = None,
                 source: str | None = None):
        self.msg, self.field, self.line, self.source = msg, field, line, source
        super().__init__(str(self))

    def __str__(self) -> str:
        where = self.source or "config"
        if self.line is not None:
            where += f":{self.line}"
        if self.field:
            where += f" [{self.field}]"
        return f"{where}: {self.msg}"


class ConvergenceWarning(UserWarning):
    """Iterative optimizer stalled before its budget was spent."""
