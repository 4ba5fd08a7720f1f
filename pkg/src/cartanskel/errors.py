"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: ParseError -> 2, InvariantError -> 3,
NumericError -> 4.
"""


class CartanError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(CartanError):
    """A problem file could not be parsed or cross-references do not resolve."""


class InvariantError(CartanError):
    """An algebraic invariant or precondition is violated (exact arithmetic)."""


class NumericError(CartanError):
    """A floating-point kernel failed (singular input, non-SPD matrix, ...)."""
