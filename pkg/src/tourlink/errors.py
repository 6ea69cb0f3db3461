"""Shared exception types."""

from __future__ import annotations


class MalformedTournamentError(ValueError):
    """An orientation table or tournament file is inconsistent."""


class GenerationError(RuntimeError):
    """A randomized generator exhausted its retry budget."""

    def __init__(self, message: str, attempts: list | None = None):
        super().__init__(message)
        self.attempts = list(attempts or [])


class InfeasibleSystemError(Exception):
    """No disjoint path system of the requested size exists.

    Carries a separating vertex set smaller than the requested path count
    (the Menger dual of the failed flow).
    """

    def __init__(self, message: str, separator):
        super().__init__(message)
        self.separator = frozenset(separator)


class StructuredFailure(Exception):
    """A pipeline stage could not establish its guarantee.

    Names the stage and the unmet condition so callers can fall back
    honestly instead of producing a wrong answer.
    """

    def __init__(self, stage: str, reason: str, witness: dict | None = None):
        super().__init__(f"{stage}: {reason}")
        self.stage = stage
        self.reason = reason
        self.witness = dict(witness or {})
