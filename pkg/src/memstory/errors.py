"""Shared exception hierarchy.

Every error raised on purpose by this package derives from MemstoryError so
callers (and the CLI) can tell our diagnostics apart from genuine bugs.
"""


class MemstoryError(Exception):
    """Base class for all errors raised by memstory."""


class InvariantViolation(MemstoryError, ValueError):
    """A domain value was constructed with data that breaks its invariants."""
