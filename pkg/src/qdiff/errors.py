"""Shared exception types.

The pipeline distinguishes three failure classes: malformed input files
(ParseError), lookups that legitimately miss (NotFoundError, which callers
often convert into an imputation policy rather than a crash), and bad
wiring such as a similarity plug applied to data it cannot handle
(ConfigurationError).
"""

from __future__ import annotations


class QdiffError(Exception):
    """Base class for all package-specific errors."""


class ParseError(QdiffError, ValueError):
    """An input file violates its documented format.

    Carries the 1-based line number of the offending line when known.
    """

    def __init__(self, message: str, line_number: int | None = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class NotFoundError(QdiffError, KeyError):
    """A title, topic id, or question id does not resolve."""

    def __str__(self) -> str:  # KeyError quotes its arg; keep plain text
        return self.args[0] if self.args else ""


class ConfigurationError(QdiffError, ValueError):
    """The requested combination of inputs and options is unusable."""
