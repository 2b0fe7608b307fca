"""Shared exception types."""

from __future__ import annotations


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class NumericalError(RuntimeError):
    """A numerical routine failed to reach its accuracy target.

    Carries enough context (achieved tolerance, worst entry, last iterates)
    to diagnose the failure without re-running.
    """

    def __init__(self, message: str, **context: object):
        super().__init__(message)
        self.context = dict(context)

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        base = super().__str__()
        if self.context:
            extras = ", ".join(f"{k}={v!r}" for k, v in self.context.items())
            return f"{base} ({extras})"
        return base
