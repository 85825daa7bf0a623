"""Exception types shared across the package."""

from __future__ import annotations


class GraphGamesError(Exception):
    """Base class for all package errors."""


class InvalidArenaError(GraphGamesError):
    """Raised when an arena description violates structural invariants.

    Carries the full list of violations as ``(code, detail)`` pairs so a
    caller can report every problem at once.  Codes: ``DeadEndVertex``,
    ``UnknownOwner``, ``MissingStart``, ``DanglingEdge``, ``DuplicateVertex``,
    ``DuplicatePlayer``.
    """

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(f"{code}: {detail}" for code, detail in self.errors))


class InvalidInputError(GraphGamesError):
    """Malformed document (JSON shape, missing fields, bad references)."""


class TooLargeError(GraphGamesError):
    """An instance exceeds a configured size bound."""


class CapExceededError(GraphGamesError):
    """Brute-force enumeration would exceed the configured cap."""


class OrderViolation(GraphGamesError):
    """A relation fails one of the strict-weak-order axioms.

    ``kind`` is one of ``irreflexivity``, ``transitivity``,
    ``negative_transitivity``; ``witness`` is the offending triple
    (or ``(x, x, x)`` for irreflexivity).
    """

    def __init__(self, kind, witness):
        self.kind = kind
        self.witness = tuple(witness)
        super().__init__(f"{kind} violated at {self.witness}")


class LinearityRequired(GraphGamesError):
    """An operation requires linear (tie-free) preferences."""


class PatternPresentError(GraphGamesError):
    """The preference pattern blocking Pareto-optimal equilibria was found.

    ``witness`` is ``(a, b, x, y, z)`` with ``z < y < x`` for player ``a``
    and ``x < z < y`` for player ``b``.
    """

    def __init__(self, witness):
        self.witness = tuple(witness)
        super().__init__(f"pattern witness {self.witness}")


class NotAntagonisticError(GraphGamesError):
    """The game is not a two-player game with inverse preferences."""


class OutOfRangeError(GraphGamesError):
    """A payoff lies outside the unit interval."""
