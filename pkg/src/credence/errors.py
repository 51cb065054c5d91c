"""Exception types raised by the engine."""


class CredenceError(Exception):
    """Base class for every error raised by this package."""


class AssumptionViolation(CredenceError, ValueError):
    """Model primitives break one of the standing inequalities.

    The ``which`` attribute names the failed assumption: ``"ii"``, ``"iii"``
    or ``"iv"`` (or ``"finite"`` for NaN/inf input).
    """

    def __init__(self, which: str, message: str):
        super().__init__(f"assumption ({which}) violated: {message}")
        self.which = which


class PriceListError(CredenceError, ValueError):
    """A price list lies outside the admissible set P."""


class RegionError(CredenceError, ValueError):
    """An operation was called with a price list from the wrong region."""


class DomainError(CredenceError, ValueError):
    """An argument lies outside the domain where a formula is defined."""


class ModeError(CredenceError, ValueError):
    """The requested construction does not exist in the current payoff mode."""


class InfeasibleError(CredenceError, RuntimeError):
    """No grid point satisfies the program constraints."""


class AlphabetMismatch(CredenceError, ValueError):
    """Strategy maps do not share a message alphabet."""


class ConfigError(CredenceError, ValueError):
    """Invalid command-line or config-file settings."""
