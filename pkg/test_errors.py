import pytest

from clifford import build_clifford_system
from errors import (
    ConfigError,
    DomainError,
    EmptyFamilyError,
    InconsistencyError,
    IsoparametricError,
    NumericalIntegrityError,
    PreconditionError,
)


def test_hierarchy():
    for cls in (DomainError, EmptyFamilyError, PreconditionError, ConfigError, NumericalIntegrityError):
        assert issubclass(cls, IsoparametricError)
    assert issubclass(EmptyFamilyError, DomainError)
    assert issubclass(ConfigError, ValueError)


def test_empty_family_names_minimal_multiplicity():
    with pytest.raises(EmptyFamilyError) as info:
        build_clifford_system(4, 1)
    assert info.value.minimal_multiplicity == 2
    assert "k=2" in str(info.value)


def test_numerical_integrity_carries_check_name():
    exc = NumericalIntegrityError("nijenhuis", 3e-3, 1e-4)
    assert exc.check == "nijenhuis"
    assert exc.discrepancy == pytest.approx(3e-3)
    assert "nijenhuis" in str(exc)


def test_inconsistency_carries_both_values():
    exc = InconsistencyError("phi_1", 1.0, 2.0, 1.0)
    assert (exc.expected, exc.actual) == (1.0, 2.0)
