import numpy as np
import pytest

from conftest import draw, random_tangent
from shape import (
    clifford_frame,
    eigenprojectors,
    maurer_cartan_check,
    principal_decomposition,
    verify_focal_normal_frame,
    verify_frame,
    verify_lemma21,
    verify_shape,
)


def test_distribution_sizes(family32, data32):
    assert tuple(data32.basis(k).shape[1] for k in range(1, 5)) == (3, 4, 3, 4)
    assert np.allclose(data32.eigenvalues, family32.lambdas, atol=1e-8)


@pytest.mark.parametrize("index", [0, 1, 2])
def test_shape_frame_and_focal_checks(family32, index):
    point = draw(family32, index=index, stream=5)
    data = principal_decomposition(family32, point)
    for report in (verify_shape(family32, data), verify_frame(family32, point, data),
                   verify_lemma21(family32, point, data), verify_focal_normal_frame(family32, point, data)):
        assert report.passed, report.failures()


def test_low_multiplicity_family(family14):
    point = draw(family14)
    data = principal_decomposition(family14, point)
    assert verify_shape(family14, data).passed
    assert verify_frame(family14, point, data).passed


def test_eigenprojectors_match_bases(family32, point32, data32):
    for k, proj in enumerate(eigenprojectors(family32, point32), start=1):
        b = data32.basis(k)
        assert np.allclose(proj, b @ b.T, atol=1e-8)


def test_frame_coefficients_in_special_orthogonal(family32, point32):
    a, frame = clifford_frame(family32, point32)
    assert np.linalg.det(a) == pytest.approx(1.0)
    assert np.allclose(frame[0], point32.p_op, atol=1e-12)


def test_maurer_cartan(family32, point32, data32):
    for seed in range(3):
        assert maurer_cartan_check(family32, point32, data32, random_tangent(point32, seed)).passed
