"""Exception hierarchy.

Input problems (malformed files, points on a pole or on the real axis)
derive from :class:`InputError`; failures of a numerical stage (Newton
divergence, vanishing denominators, analyticity radius too large) derive
from :class:`NumericalError` and carry the name of the failing stage.
"""
from __future__ import annotations


class BifreeError(Exception):
    """Base class for all package errors."""


class InputError(BifreeError, ValueError):
    """Malformed or out-of-domain input."""


class DomainError(InputError):
    """A transform was requested where it is not defined."""


class PoleError(DomainError):
    """An evaluation point hits a pole ``z s = 1`` or ``w t = 1`` of an atom."""


class NumericalError(BifreeError, ArithmeticError):
    """A numerical stage failed; ``stage`` names it."""

    def __init__(self, message: str, stage: str = "", **diagnostics):
        self.stage = stage
        self.diagnostics = diagnostics
        prefix = f"[{stage}] " if stage else ""
        super().__init__(prefix + message)


class NonConvergenceError(NumericalError):
    """An iterative solver did not reach its tolerance."""


class DegenerateDomainError(NumericalError):
    """A denominator vanished; the evaluation domain should be shrunk."""


class AnalyticityRadiusError(NumericalError):
    """Coefficient extraction left an imaginary residue; shrink the radius."""


class SingularLawError(NumericalError):
    """The requested law has no Lebesgue density."""
