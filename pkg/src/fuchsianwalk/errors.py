"""Exception types shared across the library.

Every error raised deliberately by this package derives from
:class:`FuchsianWalkError`, so callers can catch the whole family with one
clause while still distinguishing bad input from numerical breakdown.
"""


class FuchsianWalkError(Exception):
    """Base class for all errors raised by this package."""


class NumericFailure(FuchsianWalkError):
    """A computation produced a non-finite or otherwise unusable value."""


class DomainError(FuchsianWalkError):
    """An operation was applied to an element outside its domain."""


class DegenerateInput(FuchsianWalkError):
    """Input is structurally valid but degenerate for the requested operation."""


class ParseError(FuchsianWalkError):
    """Malformed textual input: a word string or a group config file."""


class ValidationError(FuchsianWalkError):
    """Structured input violates a documented invariant."""


class NoInverse(FuchsianWalkError):
    """The operation requires inverse pairing that the generator set lacks."""


class TooLarge(FuchsianWalkError):
    """A guarded enumeration or search would exceed its size bound."""


class EmptyInput(FuchsianWalkError):
    """An aggregate was requested over an empty sample collection."""
