"""Exception types shared across the package.

Every error raised on purpose derives from ChangeRiskError so callers can
distinguish expected failure modes (bad input, bad configuration) from bugs.
"""

from __future__ import annotations


class ChangeRiskError(Exception):
    """Base class for all errors raised by this package."""

    def __init__(self, message: str, *, stage: str | None = None):
        super().__init__(message)
        self.stage = stage


class ConfigError(ChangeRiskError):
    """Invalid parameter, option value, or rules/config file content."""


class DataError(ChangeRiskError):
    """Structurally valid input that violates a precondition of the pipeline."""


class DegenerateTableError(DataError):
    """Contingency table too small or empty to yield a correlation value."""


class ParseError(DataError):
    """Malformed input file.  Carries a line number or byte offset when known."""

    def __init__(self, message: str, *, line: int | None = None,
                 offset: int | None = None, stage: str | None = None):
        where = ""
        if line is not None:
            where = f"line {line}: "
        elif offset is not None:
            where = f"byte offset {offset}: "
        super().__init__(where + message, stage=stage)
        self.line = line
        self.offset = offset
