import numpy as np
import pytest

from bundleiso import dual_configuration
from conftest import THETA, draw
from errors import PreconditionError
from hermitian import d1_d2_swap_structure, random_complex_structure, random_pairswap_J
from shape import principal_decomposition, tangent_basis
from starricci import (
    einstein_fit,
    gauss_kronecker_check,
    j_adapted_basis,
    star_ricci_closed_form,
    star_ricci_gauss_oracle,
    star_ricci_matrix,
    symmetry_criterion,
    verify_star_ricci,
    weakly_star_einstein_check,
)


@pytest.fixture(scope="module")
def pairswap(point32, data32):
    return random_pairswap_J(point32, data32, np.random.default_rng(21))


def test_pairswap_star_ricci_vanishes(family32, point32, pairswap):
    report = verify_star_ricci(family32, point32, pairswap)
    assert report.passed, report.failures()
    assert star_ricci_matrix(family32, point32, pairswap).scalar == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize("pair", [(1, 2), (1, 6), (2, 5), (3, 4)])
def test_pairswap_star_ricci_vanishes_on_dual_pairs(pair):
    family = dual_configuration(pair, THETA).family
    point = draw(family, index=4)
    data = principal_decomposition(family, point)
    rng = np.random.default_rng(13)
    for _ in range(3):
        j = random_pairswap_J(point, data, rng)
        report = verify_star_ricci(family, point, j)
        assert report.passed, report.failures()


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_oracle_agrees_for_arbitrary_structures(family32, point32, seed):
    j = random_complex_structure(point32, np.random.default_rng(seed))
    closed = star_ricci_matrix(family32, point32, j)
    oracle = star_ricci_gauss_oracle(family32, point32, j, closed.basis)
    assert np.allclose(closed.matrix, oracle.matrix, atol=1e-10)
    assert np.abs(closed.matrix).max() > 1e-6


def test_closed_form_entries(family32, point32):
    j = random_complex_structure(point32, np.random.default_rng(7))
    form = star_ricci_matrix(family32, point32, j)
    b = form.basis
    for i, k in [(0, 0), (0, 3), (5, 2), (6, 6)]:
        value = star_ricci_closed_form(family32, point32, j, b[:, i], b[:, k])
        assert value == pytest.approx(form.matrix[i, k], abs=1e-10)


def test_control_structure(family32, point32, data32):
    control = d1_d2_swap_structure(data32)
    assert verify_star_ricci(family32, point32, control, prefix="control", expect_zero=False).passed
    assert symmetry_criterion(family32, point32, control, data32).passed


def test_symmetry_criterion(family32, point32, data32, pairswap):
    report = symmetry_criterion(family32, point32, pairswap, data32)
    assert report.summary()["inconclusive"] == 0
    assert report.passed
    random_j = random_complex_structure(point32, np.random.default_rng(4))
    assert symmetry_criterion(family32, point32, random_j, data32).passed


def test_weakly_einstein_and_kronecker(family32, point32, data32, pairswap):
    assert weakly_star_einstein_check(family32, point32, pairswap, data32).passed
    report = gauss_kronecker_check(family32, point32, pairswap, data32)
    assert report.passed, report.failures()
    rho, residual = einstein_fit(star_ricci_matrix(family32, point32, pairswap))
    assert abs(rho) < 1e-9 and residual < 1e-9


def test_kronecker_needs_einstein(family32, point32, data32):
    j = random_complex_structure(point32, np.random.default_rng(5))
    assert not weakly_star_einstein_check(family32, point32, j, data32).passed
    with pytest.raises(PreconditionError):
        gauss_kronecker_check(family32, point32, j, data32)


def test_adapted_basis(point32, pairswap):
    basis = tangent_basis(point32).vectors
    f, g = j_adapted_basis(pairswap.matrix, basis)
    full = np.column_stack([f, g])
    assert np.allclose(full.T @ full, np.eye(14), atol=1e-10)
    with pytest.raises(PreconditionError):
        j_adapted_basis(basis @ basis.T, basis)
