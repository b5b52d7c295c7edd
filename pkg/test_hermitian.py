import numpy as np
import pytest

from bundleiso import dual_configuration
from conftest import THETA, draw, random_tangent
from diffgeo import nijenhuis
from errors import DomainError, PreconditionError
from hermitian import (
    NEARLY_KAHLER_TOL,
    OFF_FRAME_FLOOR,
    PairSwapMode,
    build_closed_form_J,
    build_generic_pairswap_J,
    closed_form_operator,
    d1_d2_swap_structure,
    nearly_kahler_check,
    off_frame_defect,
    prop31_witness,
    random_complex_structure,
    random_pairswap_J,
    verify_pairswap,
    witness_is_nonzero,
)
from isoparametric import tangent_projector
from shape import principal_decomposition


def test_closed_form_is_pair_swapping(config34, point34, data34):
    j = build_closed_form_J(config34, point34)
    assert j.mode is PairSwapMode.CLOSED_FORM
    report = verify_pairswap(j.matrix, data34)
    assert report.passed, report.failures()


@pytest.mark.parametrize("mu", [0.5, 2.0])
def test_closed_form_with_scaled_d1_block(config34, point34, data34, mu):
    report = verify_pairswap(build_closed_form_J(config34, point34, mu).matrix, data34)
    assert report.get("acs.square").passed
    assert report.get("acs.swap").passed


def test_mu_must_be_nonzero(config34):
    with pytest.raises(DomainError):
        closed_form_operator(config34, 0.0)


@pytest.mark.parametrize("pair", [(1, 2), (1, 6), (2, 5), (3, 4)])
def test_nearly_kahler_frame_diagonal_and_off_frame_defect(pair):
    config = dual_configuration(pair, THETA)
    point = draw(config.family, index=2)
    report = nearly_kahler_check(config, point, build_closed_form_J(config, point))
    assert report.passed, report.failures()
    assert report.get("nearly_kahler.g_iij").residual < NEARLY_KAHLER_TOL
    assert report.get("nearly_kahler.off_frame_defect").residual > OFF_FRAME_FLOOR


def test_off_frame_defect_is_stable_under_step(config34, point34):
    j = build_closed_form_J(config34, point34)
    coarse = off_frame_defect(config34, point34, j, np.random.default_rng(5), step=1e-3)
    fine = off_frame_defect(config34, point34, j, np.random.default_rng(5), step=1e-4)
    assert coarse == pytest.approx(fine, rel=1e-3)
    assert fine > 0.1


def test_nijenhuis_is_tangent_and_antisymmetric(config34, point34):
    operator = closed_form_operator(config34)
    x, y = random_tangent(point34, seed=2), random_tangent(point34, seed=3)
    n_xy = nijenhuis(config34.family, point34, operator, x, y)
    n_yx = nijenhuis(config34.family, point34, operator, y, x)
    assert np.allclose(n_xy, -n_yx, atol=1e-10)
    assert np.allclose(tangent_projector(point34) @ n_xy, n_xy, atol=1e-10)


def test_nearly_kahler_needs_closed_form(config34, point34, data34):
    j = random_pairswap_J(point34, data34, np.random.default_rng(1))
    with pytest.raises(PreconditionError):
        nearly_kahler_check(config34, point34, j, data=data34)


def test_witness(config34, point34, data34):
    report = prop31_witness(config34, point34, data=data34, mu_variants=(0.5, 2.0))
    assert report.passed, report.failures()
    assert report.notes["witness"]["mu"] == 1.0


def test_witness_is_nonzero_at_generic_points(config34):
    nonzero = 0
    for index in range(10):
        point = draw(config34.family, index=index, stream=3)
        data = principal_decomposition(config34.family, point)
        nonzero += witness_is_nonzero(config34, point, data)
    assert nonzero >= 7


def test_witness_needs_three_generators():
    config = dual_configuration((2, 5), THETA)
    with pytest.raises(DomainError):
        prop31_witness(config, draw(config.family))


def test_generic_pairswap(config34, point34, data34):
    j = random_pairswap_J(point34, data34, np.random.default_rng(2))
    assert j.mode is PairSwapMode.GENERIC_BLOCKS
    assert verify_pairswap(j.matrix, data34).passed
    assert j.at(point34) is j.matrix
    with pytest.raises(PreconditionError):
        j.at(draw(config34.family, index=5, stream=1))


def test_block_map_rejects_non_isometry(point34, data34):
    b1 = data34.basis(1)
    with pytest.raises(PreconditionError):
        build_generic_pairswap_J(point34, data34, b1 @ b1.T, data34.basis(4) @ data34.basis(2).T)


def test_controls_are_not_pair_swapping(point34, data34):
    control = d1_d2_swap_structure(data34)
    report = verify_pairswap(control, data34)
    assert report.get("acs.square").passed
    assert not report.get("acs.swap").passed
    random_j = random_complex_structure(point34, np.random.default_rng(3))
    assert not verify_pairswap(random_j, data34).get("acs.swap").passed
