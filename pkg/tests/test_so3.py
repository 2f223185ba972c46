import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sanm_attitude import so3
from sanm_attitude.so3 import (angular_velocity_error, attitude_error, error_rate_matrix, exp_so3,
                               hat, is_rotation, log_so3, orthonormalize, psi_R, vee)

import oracle_values as ov

finite = st.floats(min_value=-50.0, max_value=50.0, allow_nan=False, allow_infinity=False)
vec3 = st.tuples(finite, finite, finite).map(np.array)
small = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False)
rotvec = st.tuples(small, small, small).map(np.array)


def test_hat_examples():
    np.testing.assert_array_equal(hat([1, 0, 0]), [[0, 0, 0], [0, 0, -1], [0, 1, 0]])
    np.testing.assert_array_equal(hat([0, 0, 0]), np.zeros((3, 3)))
    np.testing.assert_array_equal(hat([1, 2, 3]), [[0, -3, 2], [3, 0, -1], [-2, 1, 0]])


def test_vee_examples():
    np.testing.assert_array_equal(vee(hat([1, 2, 3])), [1, 2, 3])
    np.testing.assert_array_equal(vee(np.zeros((3, 3))), [0, 0, 0])
    np.testing.assert_array_equal(vee([[0, -1, 0], [1, 0, 0], [0, 0, 0]]), [0, 0, 1])


def test_vee_rejects_symmetric_part():
    m = hat([1, 2, 3])
    m[0, 1] += 1e-6
    with pytest.raises(so3.NonSkewInput):
        vee(m)
    m = hat([1, 2, 3])
    m[0, 1] += 5e-9           # within tolerance
    vee(m)


@given(vec3)
def test_vee_hat_roundtrip_exact(v):
    np.testing.assert_array_equal(vee(hat(v)), v)


@given(vec3)
def test_hat_vee_roundtrip(v):
    S = hat(v)
    np.testing.assert_array_equal(hat(vee(S)), S)


@given(vec3, vec3)
def test_hat_is_cross_product(a, b):
    np.testing.assert_allclose(hat(a) @ b, np.cross(a, b), rtol=1e-12, atol=1e-9)


@given(vec3)
def test_hat_skew(v):
    S = hat(v)
    np.testing.assert_array_equal(S, -S.T)


def test_exp_examples():
    np.testing.assert_array_equal(exp_so3([0, 0, 0]), np.eye(3))
    np.testing.assert_allclose(exp_so3([0, 0, math.pi]), np.diag([-1.0, -1.0, 1.0]), atol=1e-15)
    np.testing.assert_allclose(exp_so3(ov.EXP_SERIES_V), ov.EXP_SERIES_R, atol=1e-15)


def test_exp_small_angle_branch():
    v = np.array([3e-9, -2e-9, 1e-9])
    R = exp_so3(v)
    np.testing.assert_allclose(R, np.eye(3) + hat(v) + 0.5 * hat(v) @ hat(v), atol=1e-24)
    assert is_rotation(R)


@given(vec3)
def test_exp_is_rotation(v):
    assert is_rotation(exp_so3(v), tol=1e-9)


@given(vec3)
def test_exp_negation_is_transpose(v):
    np.testing.assert_allclose(exp_so3(-v), exp_so3(v).T, atol=1e-14)


@given(rotvec)
def test_log_inverts_exp(v):
    if np.linalg.norm(v) >= math.pi - 1e-3:
        return
    np.testing.assert_allclose(log_so3(exp_so3(v)), v, atol=1e-9)


def test_log_half_turn():
    v = np.array([0.0, math.pi, 0.0])
    np.testing.assert_allclose(np.abs(log_so3(exp_so3(v))), np.abs(v), atol=1e-7)


def test_attitude_error_examples():
    I = np.eye(3)
    np.testing.assert_array_equal(attitude_error(I, I), np.zeros(3))
    np.testing.assert_allclose(attitude_error(exp_so3([0, 0, math.pi / 2]), I), [0, 0, 1], atol=1e-15)
    np.testing.assert_allclose(attitude_error(exp_so3([0, 0, 0.1]), I), [0, 0, ov.SIN_01], atol=1e-16)


def test_angular_velocity_error_examples():
    I = np.eye(3)
    np.testing.assert_array_equal(angular_velocity_error(np.zeros(3), I, I, np.zeros(3)), np.zeros(3))
    np.testing.assert_array_equal(angular_velocity_error([0, 0, 1], I, I, [0, 0, 1]), np.zeros(3))
    R = exp_so3([0, 0, math.pi])
    np.testing.assert_allclose(angular_velocity_error(np.zeros(3), R, I, [1, 0, 0]), [1, 0, 0], atol=1e-15)


def test_psi_examples():
    I = np.eye(3)
    assert psi_R(I, I) == 0.0
    assert psi_R(exp_so3([0, 0, math.pi]), I) == pytest.approx(2.0, abs=1e-15)
    assert psi_R(exp_so3([0, 0, math.pi / 2]), I) == pytest.approx(1.0, abs=1e-15)


@settings(max_examples=300)
@given(rotvec, rotvec)
def test_psi_bounds_and_identity(a, b):
    R, Rd = exp_so3(a), exp_so3(b)
    psi = psi_R(R, Rd)
    e = attitude_error(R, Rd)
    assert 0.0 <= psi <= 2.0
    assert float(e @ e) == pytest.approx(psi * (2.0 - psi), abs=1e-9)
    assert np.linalg.norm(e) <= 1.0 + 1e-12
    assert 0.5 * float(e @ e) <= psi + 1e-12
    for cap in (1.0, 1.5, 1.99):
        if psi <= cap:
            assert psi <= float(e @ e) / (2.0 - cap) + 1e-12


@given(rotvec, rotvec)
def test_attitude_error_swap_antisymmetry(a, b):
    # e(Rd, R) expressed in R's frame is -e(R, Rd)
    R, Rd = exp_so3(a), exp_so3(b)
    e1 = attitude_error(R, Rd)
    e2 = attitude_error(Rd, R)
    np.testing.assert_allclose(e1 + (Rd.T @ R) @ e2, 0.0, atol=1e-9)


@given(rotvec, rotvec)
def test_error_rate_matrix_norm_bounded(a, b):
    Y = error_rate_matrix(exp_so3(a), exp_so3(b))
    assert np.linalg.norm(Y, 2) <= 1.0 + 1e-12


@given(rotvec, rotvec, st.tuples(small, small, small).map(np.array))
def test_error_rate_matrix_drives_e_R(a, b, w):
    # de_R/dt = Y e_Omega for fixed Rd and R' = R hat(w)
    R, Rd = exp_so3(a), exp_so3(b)
    h = 1e-6
    de = (attitude_error(R @ exp_so3(h * w), Rd) - attitude_error(R @ exp_so3(-h * w), Rd)) / (2 * h)
    np.testing.assert_allclose(de, error_rate_matrix(R, Rd) @ w, atol=1e-7)


def test_orthonormalize_fixed_point():
    R = exp_so3([0.3, -0.2, 0.1])
    np.testing.assert_allclose(orthonormalize(R), R, atol=1e-12)


def test_orthonormalize_matches_svd_oracle():
    M = np.eye(3)
    M[0, 1] += 1e-6
    R = orthonormalize(M)
    np.testing.assert_allclose(R, ov.NEAREST_ROT_I_PLUS_1E6, atol=1e-15)
    assert np.linalg.norm(R - M) <= 2e-6
    assert so3.rotation_defect(R) <= 1e-12


@given(rotvec, st.tuples(*[st.floats(-1e-3, 1e-3)] * 9).map(lambda x: np.array(x).reshape(3, 3)))
def test_orthonormalize_property(v, E):
    R = orthonormalize(exp_so3(v) + E)
    assert so3.rotation_defect(R) <= 1e-12


def test_orthonormalize_rejects_far_inputs():
    with pytest.raises(so3.TooFarFromSO3):
        orthonormalize(2.0 * np.eye(3))
    with pytest.raises(so3.TooFarFromSO3):
        orthonormalize(np.diag([1.0, 1.0, -1.0]))
