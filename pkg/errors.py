"""
Exception hierarchy for the OT-FKM verification toolkit.

Verification operations report failed checks as report entries; the
exceptions below are reserved for invalid inputs and for broken numerics.
"""
from typing import Any


class IsoparametricError(Exception):
    """Root of every error raised by this package."""


class DomainError(IsoparametricError, ValueError):
    """An argument lies outside the admissible domain (m, flavor, pair, parity)."""


class EmptyFamilyError(DomainError):
    """l - m - 1 < 1: the Clifford system carries no isoparametric family."""

    def __init__(self, m: int, multiplicity: int, minimal_multiplicity: int):
        self.m = m
        self.multiplicity = multiplicity
        self.minimal_multiplicity = minimal_multiplicity
        super().__init__(
            f"empty family for m={m}, k={multiplicity}: need l - m - 1 >= 1, "
            f"minimal multiplicity is k={minimal_multiplicity}"
        )


class StalePointError(IsoparametricError):
    """A point no longer satisfies the level condition f(x) = cos 4θ."""


class InconsistencyError(IsoparametricError):
    """A closed form disagrees with its defining expression."""

    def __init__(self, name: str, expected: Any, actual: Any, residual: float):
        self.name = name
        self.expected = expected
        self.actual = actual
        self.residual = residual
        super().__init__(f"{name}: closed form mismatch, residual {residual:.3e}")


class SamplingError(IsoparametricError):
    """The rejection budget of the point sampler was exhausted."""


class DegeneratePointError(IsoparametricError):
    """Principal curvature clusters cannot be separated at this point."""


class PreconditionError(IsoparametricError, ValueError):
    """An operation was called with inputs violating its precondition."""


class NumericalIntegrityError(IsoparametricError):
    """Two independent computations of the same quantity disagree."""

    def __init__(self, check: str, discrepancy: float, tolerance: float):
        self.check = check
        self.discrepancy = discrepancy
        self.tolerance = tolerance
        super().__init__(
            f"{check}: methods disagree by {discrepancy:.3e} (tolerance {tolerance:.1e})"
        )


class ConfigError(IsoparametricError, ValueError):
    """Invalid run configuration (usage error)."""
