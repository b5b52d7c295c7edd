import numpy as np
import pytest

from conftest import random_tangent
from diffgeo import (
    clifford_d1_frame_field,
    connection_coefficients,
    covariant_derivative,
    exact_bracket,
    lie_bracket,
    normal_field,
    omega_bar_check,
    principal_frame_field,
    projected_constant,
    projected_constant_derivative,
    richardson_ratio,
    torsion_residual,
    verify_connection,
)
from shape import ambient_shape_operator


def test_derivative_of_normal_is_minus_shape_operator(family32, point32):
    v = random_tangent(point32, seed=1)
    expected = -ambient_shape_operator(family32, point32) @ v
    assert np.allclose(covariant_derivative(family32, point32, normal_field, v), expected, atol=1e-6)


def test_zero_direction(family32, point32):
    assert not np.any(covariant_derivative(family32, point32, normal_field, np.zeros(16)))


def test_projected_constant_against_exact_form(family32, point32):
    rng = np.random.default_rng(4)
    u = rng.standard_normal(16)
    v = random_tangent(point32, seed=5)
    numeric = covariant_derivative(family32, point32, projected_constant(u), v)
    assert np.allclose(numeric, projected_constant_derivative(family32, point32, u, v), atol=1e-6)


def test_bracket_of_projected_constants_is_torsion_free(family32, point32):
    u, w = np.random.default_rng(6).standard_normal((2, 16))
    exact = exact_bracket(family32, point32, u, w)
    assert np.linalg.norm(exact) > 1e-2
    assert torsion_residual(family32, point32, u, w) < 1e-6
    bracket = lie_bracket(family32, point32, projected_constant(u), projected_constant(w))
    assert not np.allclose(bracket, -exact, atol=1e-3)


def test_bracket_of_a_field_with_itself_vanishes(family32, point32):
    x = projected_constant(random_tangent(point32, 6))
    assert not np.any(lie_bracket(family32, point32, x, x))


def test_principal_frame_connection(family32, point32, data32):
    field = principal_frame_field(family32, point32, data32)
    assert field.size == 14
    conn = connection_coefficients(family32, point32, field)
    report = verify_connection(conn)
    assert report.passed, report.failures()


def test_clifford_d1_frame_matches_decomposition(family32, point32, data32):
    frame = clifford_d1_frame_field(family32, point32, data32)(point32)
    assert frame.shape == (16, 6)
    assert np.allclose(frame.T @ frame, np.eye(6), atol=1e-10)


def test_omega_bar(family32, point32, data32):
    for seed in (8, 9):
        assert omega_bar_check(family32, point32, data32, random_tangent(point32, seed)).passed


def test_second_order_convergence(family32, point32):
    assert richardson_ratio(family32, point32, random_tangent(point32, 10)) == pytest.approx(4.0, abs=0.5)
