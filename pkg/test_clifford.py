import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from clifford import (
    CliffordSystem,
    FullSquareFlavor,
    build_clifford_system,
    build_full_square_system,
    build_skew_representation,
    clifford_residuals,
    delta,
    dump_clifford_system,
    load_clifford_dump,
    minimal_multiplicity,
    pair_configuration,
    parse_pair,
    split_dual_subsystems,
    sum_of_squares_residual,
    verify_clifford_system,
    verify_skew_representation,
)
from errors import DomainError, EmptyFamilyError, NumericalIntegrityError
from isoparametric import cartan_munzner


def test_delta_table():
    assert [delta(m) for m in range(1, 11)] == [1, 2, 4, 4, 8, 8, 8, 8, 16, 32]
    with pytest.raises(DomainError):
        delta(0)


@given(st.integers(min_value=1, max_value=40))
def test_delta_period_eight(m):
    assert delta(m + 8) == 16 * delta(m)


@given(st.integers(min_value=1, max_value=40))
def test_minimal_multiplicity_is_minimal(m):
    k = minimal_multiplicity(m)
    assert k * delta(m) - m - 1 >= 1
    assert (k - 1) * delta(m) - m - 1 < 1


@pytest.mark.parametrize("count, multiplicity, dim", [(0, 3, 3), (2, 1, 4), (7, 1, 8), (8, 1, 16), (9, 1, 32)])
def test_skew_representations(count, multiplicity, dim):
    rep = build_skew_representation(count, multiplicity)
    assert rep.dim == dim
    assert len(rep.generators) == count
    assert verify_skew_representation(rep).passed


def test_system_sizes_and_relations():
    system = build_clifford_system(3, 2)
    assert (system.m, system.l, system.m2) == (3, 8, 4)
    assert len(system.matrices) == 4
    assert all(p.shape == (16, 16) for p in system.matrices)
    assert verify_clifford_system(system).passed


def test_matrices_are_read_only():
    system = build_clifford_system(2, 1)
    with pytest.raises(ValueError):
        system.matrices[0][0, 0] = 5.0


@pytest.mark.parametrize("m, k", [(1, 1), (4, 1), (2, 0)])
def test_empty_family(m, k):
    with pytest.raises(DomainError):
        build_clifford_system(m, k)


def test_empty_family_reports_minimum():
    with pytest.raises(EmptyFamilyError) as info:
        build_clifford_system(1, 1)
    assert info.value.minimal_multiplicity == 3
    assert build_clifford_system(1, 3).m2 == 1


def test_broken_anticommutation_is_detected():
    system = build_clifford_system(3, 2)
    broken = CliffordSystem(m=3, l=8, matrices=(system.matrices[0], system.matrices[0]) + system.matrices[2:])
    assert clifford_residuals(broken.matrices)["anticommutation"] == pytest.approx(2.0)
    assert not verify_clifford_system(broken).passed
    assert not verify_clifford_system(system, tol=0.0).passed


@pytest.mark.parametrize("flavor, count, dim", [
    (FullSquareFlavor.FIVE_ON_8D, 5, 8),
    ("Nine_on_16d", 9, 16),
])
def test_full_square_systems(flavor, count, dim):
    full = build_full_square_system(flavor)
    assert full.count == count
    assert full.base.ambient_dim == dim
    rng = np.random.default_rng(3)
    for _ in range(20):
        x = rng.standard_normal(dim)
        x /= np.linalg.norm(x)
        assert sum_of_squares_residual(full.base, x) < 1e-12
        assert cartan_munzner(full.base, x) == pytest.approx(-1.0, abs=1e-12)


def test_unknown_flavor():
    with pytest.raises(DomainError):
        build_full_square_system("Seven_on_12d")


def test_full_square_identity_failure_is_a_numerical_error(monkeypatch):
    monkeypatch.setattr("clifford.SUM_OF_SQUARES_TOL", 0.0)
    with pytest.raises(NumericalIntegrityError) as info:
        build_full_square_system(FullSquareFlavor.FIVE_ON_8D)
    assert info.value.check == "Five_on_8d.sum_of_squares"


def test_splits():
    nine = build_full_square_system(FullSquareFlavor.NINE_ON_16D)
    first, second = split_dual_subsystems(nine, 3)
    assert (len(first.matrices), len(second.matrices)) == (4, 5)
    assert (first.m, first.m2, second.m, second.m2) == (3, 4, 4, 3)
    five = build_full_square_system(FullSquareFlavor.FIVE_ON_8D)
    first, second = split_dual_subsystems(five, 1)
    assert (len(first.matrices), len(second.matrices)) == (2, 3)
    for m in (7, 8):
        with pytest.raises(DomainError):
            split_dual_subsystems(nine, m)


def test_pairs():
    assert parse_pair("3,4") == (3, 4)
    assert parse_pair((1, 6)) == (1, 6)
    for bad in ("3,5", "x", "1,2,3"):
        with pytest.raises(DomainError):
            parse_pair(bad)
    full, m = pair_configuration("2,5")
    assert full.flavor is FullSquareFlavor.NINE_ON_16D and m == 2


def test_construction_is_deterministic():
    a, b = build_clifford_system(5, 1), build_clifford_system(5, 1)
    assert all(np.array_equal(p, q) for p, q in zip(a.matrices, b.matrices))


def test_dump_and_load(tmp_path):
    system = build_clifford_system(2, 2)
    loaded = load_clifford_dump(dump_clifford_system(system, tmp_path / "p.txt"))
    assert (loaded.m, loaded.l) == (system.m, system.l)
    assert all(np.array_equal(p, q) for p, q in zip(system.matrices, loaded.matrices))


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(min_value=-1, max_value=1, allow_nan=False), min_size=4, max_size=4))
def test_points_of_the_clifford_sphere_are_involutions(coefficients):
    a = np.asarray(coefficients)
    assume(np.linalg.norm(a) > 1e-3)
    system = build_clifford_system(3, 2)
    p = system.combine(a / np.linalg.norm(a))
    assert np.allclose(p @ p, np.eye(16), atol=1e-12)
    assert np.allclose(p, p.T)
