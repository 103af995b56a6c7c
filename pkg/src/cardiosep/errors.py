"""Exception types shared across the toolkit.

The CLI maps these onto its exit codes: usage problems exit 1, file and
format problems exit 2, numeric failures exit 3, advisor transport failures
with fallback disabled exit 4.
"""


class CardiosepError(Exception):
    """Base class for toolkit errors."""


class UsageError(CardiosepError):
    """Bad command-line usage or incompatible argument combinations."""


class DataFormatError(CardiosepError):
    """Unreadable, unwritable, or malformed input/output files."""


class NumericsError(CardiosepError):
    """A numeric precondition was violated or a computation broke down."""


class AdvisorTransportError(CardiosepError):
    """The HTTP advisor backend could not produce a response."""
