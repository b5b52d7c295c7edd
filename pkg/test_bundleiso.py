from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.stats import ortho_group

from bundleiso import (
    continuity_check,
    dual_configuration,
    eigen_split,
    global_section_R1,
    iso_d1_d3,
    iso_d2_d4_dual,
    m1_remark_check,
    rotate_pairs,
    sigma_map,
    verify_global_section,
)
from clifford import build_clifford_system
from conftest import THETA, draw, random_tangent
from errors import DomainError, PreconditionError
from isoparametric import IsoparametricFamily, tangent_path
from report import VerificationReport
from shape import principal_decomposition
from subspaces import subspace_distance


def _family_point_data(m, k):
    family = IsoparametricFamily(build_clifford_system(m, k), THETA)
    point = draw(family, index=1)
    return family, point, principal_decomposition(family, point)


@pytest.mark.parametrize("m, k", [(1, 4), (2, 2), (3, 2), (4, 2)])
def test_d1_to_d3(m, k):
    family, point, data = _family_point_data(m, k)
    iso = iso_d1_d3(family, point, data)
    assert iso.report().passed
    assert np.array_equal(iso.matrix, data.r0)


@pytest.mark.parametrize("pair", [(1, 2), (1, 6), (2, 5), (3, 4)])
def test_d2_to_d4_through_dual(pair):
    config = dual_configuration(pair, THETA)
    assert config.pair == pair
    point = draw(config.family)
    iso = iso_d2_d4_dual(config, point)
    assert iso.report().passed, iso.report().failures()


def test_dual_range_name(config34, point34, data34):
    names = [record.name for record in iso_d2_d4_dual(config34, point34, data34).checks]
    assert "iso_d2_d4.q_range_4_7_square" in names


@pytest.mark.parametrize("m, k", [(1, 4), (3, 2)])
def test_eigen_split(m, k):
    family, point, data = _family_point_data(m, k)
    split = eigen_split(family, point, data)
    assert VerificationReport(records=list(split.checks)).passed
    assert np.allclose(split.plus_projector + split.minus_projector, np.eye(family.ambient_dim))


def test_section_needs_odd_m():
    family, point, _ = _family_point_data(2, 2)
    with pytest.raises(DomainError):
        global_section_R1(family, point)


def test_sigma(family32, point32, data32):
    r1 = global_section_R1(family32, point32)
    assert verify_global_section(family32, point32, r1).passed
    sigma = sigma_map(family32, point32, data32, r1)
    assert VerificationReport(records=list(sigma.checks)).passed


def test_sigma_rejects_commuting_operator(family32, point32, data32):
    with pytest.raises(PreconditionError):
        sigma_map(family32, point32, data32, point32.p_op)


def test_m1_remark(family14, family32, point32, data32):
    point = draw(family14)
    assert m1_remark_check(family14, point, principal_decomposition(family14, point)).passed
    with pytest.raises(DomainError):
        m1_remark_check(family32, point32, data32)


def test_sigma_tilde_continuity(family32, point32):
    path = tangent_path(family32, point32, random_tangent(point32, 3), 1e-2, 6)
    report = continuity_check(family32, path, 1e-2)
    assert report.passed
    assert report.notes["continuity"]["steps"] == 6


@pytest.mark.parametrize("m, k", [(5, 1), (7, 2)])
def test_sigma_and_continuity_for_higher_odd_m(m, k):
    family, point, data = _family_point_data(m, k)
    r1 = global_section_R1(family, point)
    assert verify_global_section(family, point, r1).passed
    assert VerificationReport(records=list(sigma_map(family, point, data, r1).checks)).passed
    path = tangent_path(family, point, random_tangent(point, 4), 1e-3, 20)
    assert continuity_check(family, path, 1e-3).passed


def test_d2_gauge_rotation_leaves_images_unchanged(config34, point34, data34):
    family = config34.family
    rotation = ortho_group.rvs(dim=data34.basis(2).shape[1], random_state=np.random.default_rng(8))
    b1, b2, b3, b4 = data34.bases
    rotated = replace(data34, bases=(b1, b2 @ rotation, b3, b4))

    before, after = iso_d2_d4_dual(config34, point34, data34), iso_d2_d4_dual(config34, point34, rotated)
    assert after.report().passed
    assert subspace_distance(before.matrix @ b2, after.matrix @ rotated.basis(2)) < 1e-8

    r1 = global_section_R1(family, point34)
    sigma_before = sigma_map(family, point34, data34, r1)
    sigma_after = sigma_map(family, point34, rotated, r1)
    assert VerificationReport(records=list(sigma_after.checks)).passed
    domain = np.column_stack([b1, b2])
    assert subspace_distance(sigma_before.sigma_tilde @ domain, sigma_after.sigma_tilde @ domain) < 1e-8

    assert VerificationReport(records=list(eigen_split(family, point34, rotated).checks)).passed


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.sampled_from([2, 4, 6, 8]),
              elements=st.floats(min_value=-10, max_value=10, allow_nan=False)))
def test_rotated_pairs_are_tangent_to_the_sphere(a):
    v = rotate_pairs(a)
    assert abs(v @ a) < 1e-9
    assert np.linalg.norm(v) == pytest.approx(np.linalg.norm(a))
