import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from sanm_attitude.controller import (AttitudeCommand, ControllerGains, DegenerateHeading,
                                      ReferenceTrajectory, TrajectoryKind, ZeroForce,
                                      compute_moment, desired_attitude, desired_rates)
from sanm_attitude.rigid_body import InertiaTensor, RigidBodyState, Scenario, gyroscopic_accel
from sanm_attitude.so3 import exp_so3, is_rotation

MG = 1.85 * 9.81
J = InertiaTensor(0.011, 0.020, 0.023)
HOVER = AttitudeCommand(np.eye(3), np.zeros(3), np.zeros(3))


def test_gains_validation():
    with pytest.raises(ValueError):
        ControllerGains(k_R=0.0)
    with pytest.raises(ValueError):
        ControllerGains(c_R=-0.1)


def test_desired_attitude_examples():
    np.testing.assert_allclose(desired_attitude([0, 0, -MG], [1, 0, 0]), np.eye(3), atol=1e-15)
    np.testing.assert_allclose(desired_attitude([0, 0, -MG], [0, 1, 0]),
                               exp_so3([0, 0, math.pi / 2]), atol=1e-15)
    with pytest.raises(DegenerateHeading):
        desired_attitude([0, 0, -MG], [0, 0, 1])
    with pytest.raises(ZeroForce):
        desired_attitude([0, 0, 1e-7], [1, 0, 0])


unit = st.tuples(*[st.floats(-1, 1)] * 3).map(np.array)


@given(unit, unit)
def test_desired_attitude_is_right_handed(F, b):
    assume(np.linalg.norm(F) > 1e-3 and np.linalg.norm(b) > 1e-3)
    b = b / np.linalg.norm(b)
    assume(np.linalg.norm(np.cross(-F / np.linalg.norm(F), b)) > 1e-2)
    R = desired_attitude(F, b)
    assert is_rotation(R, 1e-12)
    np.testing.assert_allclose(R[:, 2], -F / np.linalg.norm(F), atol=1e-12)


def test_fixed_hover_rates_are_exact_zeros():
    cmd = desired_rates(ReferenceTrajectory(), 3.7, 0.0025)
    np.testing.assert_array_equal(cmd.Omega_d, np.zeros(3))
    np.testing.assert_array_equal(cmd.Omega_d_dot, np.zeros(3))


def test_heading_spin_rates():
    traj = ReferenceTrajectory(kind=TrajectoryKind.HEADING_SPIN, yaw_rate=0.5)
    for t in (0.0, 1.3, 7.9):
        cmd = desired_rates(traj, t, 0.0025)
        np.testing.assert_allclose(cmd.Omega_d, [0, 0, 0.5], atol=1e-6)
        np.testing.assert_allclose(cmd.Omega_d_dot, [0, 0, 0], atol=1e-5)


def test_waypoint_trajectory_smooth():
    traj = ReferenceTrajectory(kind="attitude_waypoints",
                               waypoints=[(0, 0, 0, 0), (2, 0.2, -0.1, 0.5), (4, 0, 0, 0)])
    np.testing.assert_allclose(traj.attitude(0.0), np.eye(3), atol=1e-15)
    cmd = desired_rates(traj, 1.0, 0.0025)
    assert is_rotation(cmd.Rd)
    assert np.isfinite(cmd.Omega_d_dot).all()
    with pytest.raises(ValueError):
        ReferenceTrajectory(kind="attitude_waypoints")


def _state(W=(0.0, 0.0, 0.0)):
    return RigidBodyState(np.eye(3), np.array(W, dtype=float))


def test_moment_examples():
    g = ControllerGains(100, 80, 0.6)
    Jb = J.vec
    M = compute_moment(np.zeros(3), np.zeros(3), _state(), HOVER, g, Jb, np.zeros(3), J, "unknown_inertia")
    np.testing.assert_array_equal(M, np.zeros(3))
    M = compute_moment([0.1, 0, 0], np.zeros(3), _state(), HOVER, g, Jb, np.zeros(3), J, "unknown_inertia")
    assert M[0] == pytest.approx(-0.11, abs=1e-15)
    M = compute_moment(np.zeros(3), [0, 0.2, 0], _state(), HOVER, g, Jb, np.zeros(3), J, "unknown_inertia")
    assert M[1] == pytest.approx(-0.32, abs=1e-15)


def test_moment_gyroscopic_term_only_when_known():
    g = ControllerGains()
    s = _state([1.0, 1.0, 0.3])
    z = np.zeros(3)
    Mu = compute_moment(z, z, s, HOVER, g, J.vec, z, J, Scenario.UNKNOWN_INERTIA)
    Mk = compute_moment(z, z, s, HOVER, g, J.vec, z, J, Scenario.KNOWN_INERTIA)
    np.testing.assert_allclose(Mk - Mu, J.vec * gyroscopic_accel(s.Omega, J), atol=1e-15)


def test_moment_feedforward_terms():
    g = ControllerGains()
    R = exp_so3([0.1, -0.2, 0.05])
    Rd = exp_so3([0.0, 0.1, 0.0])
    cmd = AttitudeCommand(Rd, np.array([0.2, 0.0, 0.5]), np.array([0.1, 0.3, -0.2]))
    s = RigidBodyState(R, np.array([0.3, 0.1, -0.4]))
    z = np.zeros(3)
    M = compute_moment(z, z, s, cmd, g, np.ones(3), np.array([0.5, -0.5, 1.0]), J, "unknown_inertia")
    RtRd = R.T @ Rd
    expected = -np.cross(s.Omega, RtRd @ cmd.Omega_d) + RtRd @ cmd.Omega_d_dot - [0.5, -0.5, 1.0]
    np.testing.assert_allclose(M, expected, atol=1e-14)


ev = st.tuples(*[st.floats(-1, 1)] * 3).map(np.array)


@given(ev, ev, ev, ev)
def test_moment_superposition(a1, b1, a2, b2):
    g = ControllerGains()
    s = _state([0.2, -0.3, 0.1])
    phi = np.array([0.3, 0.2, -0.1])
    f = lambda e, w: compute_moment(e, w, s, HOVER, g, J.vec, phi, J, "known_inertia")
    base = f(np.zeros(3), np.zeros(3))
    lhs = f(a1 + a2, b1 + b2) - base
    rhs = (f(a1, b1) - base) + (f(a2, b2) - base)
    np.testing.assert_allclose(lhs, rhs, atol=1e-13)
