"""Exception types that callers may need to distinguish.

Ordinary bad arguments raise ``ValueError``; the two classes here mark
conditions a driver program maps to a dedicated exit status.
"""


class CapacityError(RuntimeError):
    """Exact enumeration would exceed the configured composition budget."""


class BracketError(RuntimeError):
    """A distribution is too degenerate to bracket the requested level."""
