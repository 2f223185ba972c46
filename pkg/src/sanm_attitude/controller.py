"""Geometric attitude controller: desired attitude, reference rates, moment law."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
import numpy as np

from .rigid_body import InertiaTensor, RigidBodyState, Scenario, gyroscopic_accel
from .so3 import cross, exp_so3, log_so3

ZERO_FORCE_TOL = 1e-6
HEADING_TOL = 1e-3


class ZeroForce(ValueError):
    pass


class DegenerateHeading(ValueError):
    """Desired heading is (nearly) parallel to the thrust axis."""


@dataclass(frozen=True)
class ControllerGains:
    k_R: float = 100.0
    k_Omega: float = 80.0
    c_R: float = 0.6

    def __post_init__(self):
        if not (self.k_R > 0 and self.k_Omega > 0 and self.c_R >= 0):
            raise ValueError("gains must satisfy k_R > 0, k_Omega > 0, c_R >= 0")


@dataclass(frozen=True)
class AttitudeCommand:
    Rd: np.ndarray
    Omega_d: np.ndarray
    Omega_d_dot: np.ndarray


def desired_attitude(F_d, b1d) -> np.ndarray:
    """R_c = [b1c, b2c, b3c] with b3c along -F_d and b1c as close to b1d as possible."""
    F_d = np.asarray(F_d, dtype=float)
    nF = float(np.linalg.norm(F_d))
    if nF <= ZERO_FORCE_TOL:
        raise ZeroForce(f"|F_d| = {nF:.3g}")
    b3c = -F_d / nF
    c = cross(b3c, np.asarray(b1d, dtype=float))
    nc = float(np.linalg.norm(c))
    if nc < HEADING_TOL:
        raise DegenerateHeading(f"|b3c x b1d| = {nc:.3g}")
    b2c = c / nc
    b1c = cross(b2c, b3c)
    return np.column_stack([b1c, b2c, b3c])


class TrajectoryKind(str, enum.Enum):
    FIXED_HOVER = "fixed_hover"
    HEADING_SPIN = "heading_spin"
    ATTITUDE_WAYPOINTS = "attitude_waypoints"


def _smootherstep(x: float) -> float:
    x = min(1.0, max(0.0, x))
    return x * x * x * (x * (6.0 * x - 15.0) + 10.0)


@dataclass(frozen=True)
class ReferenceTrajectory:
    """Heading b1d(t) and force F_d(t) feeding desired_attitude().

    ``waypoints`` rows are (t, roll, pitch, yaw) in seconds/radians; the
    attitude blends between them with a C2 smootherstep.
    """

    kind: TrajectoryKind = TrajectoryKind.FIXED_HOVER
    hover_force: float = 1.85 * 9.81
    b1d: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0]))
    yaw_rate: float = 0.0
    waypoints: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "kind", TrajectoryKind(self.kind))
        object.__setattr__(self, "b1d", np.asarray(self.b1d, dtype=float))
        object.__setattr__(self, "waypoints", tuple(tuple(map(float, w)) for w in self.waypoints))
        if self.kind is TrajectoryKind.ATTITUDE_WAYPOINTS and not self.waypoints:
            raise ValueError("attitude_waypoints needs at least one waypoint")

    def _euler(self, t: float) -> tuple[float, float, float]:
        wps = self.waypoints
        if t <= wps[0][0]:
            return wps[0][1:]
        for (t0, *a), (t1, *b) in zip(wps, wps[1:]):
            if t <= t1:
                s = _smootherstep((t - t0) / (t1 - t0))
                return tuple(x + s * (y - x) for x, y in zip(a, b))
        return wps[-1][1:]

    def heading(self, t: float) -> np.ndarray:
        if self.kind is TrajectoryKind.HEADING_SPIN:
            psi = self.yaw_rate * t
            return np.array([math.cos(psi), math.sin(psi), 0.0])
        if self.kind is TrajectoryKind.ATTITUDE_WAYPOINTS:
            psi = self._euler(t)[2]
            return np.array([math.cos(psi), math.sin(psi), 0.0])
        return self.b1d

    def force(self, t: float) -> np.ndarray:
        F = np.array([0.0, 0.0, -self.hover_force])
        if self.kind is TrajectoryKind.ATTITUDE_WAYPOINTS:
            roll, pitch, _ = self._euler(t)
            tilt = exp_so3([0.0, pitch, 0.0]) @ exp_so3([roll, 0.0, 0.0])
            F = tilt @ F
        return F

    def attitude(self, t: float) -> np.ndarray:
        return desired_attitude(self.force(t), self.heading(t))


def desired_rates(traj: ReferenceTrajectory, t: float, dt: float) -> AttitudeCommand:
    """Rd(t) plus Omega_d, Omega_d_dot from central differences through the log map."""
    Rd = traj.attitude(t)
    if traj.kind is TrajectoryKind.FIXED_HOVER:
        return AttitudeCommand(Rd, np.zeros(3), np.zeros(3))

    def omega_at(tau: float) -> np.ndarray:
        return log_so3(traj.attitude(tau - dt).T @ traj.attitude(tau + dt)) / (2.0 * dt)

    Omega_d = omega_at(t)
    Omega_d_dot = (omega_at(t + dt) - omega_at(t - dt)) / (2.0 * dt)
    return AttitudeCommand(Rd, Omega_d, Omega_d_dot)


def compute_moment(e_R, e_Omega, state: RigidBodyState, cmd: AttitudeCommand,
                   gains: ControllerGains, J_bar, phi_bar, J_true: InertiaTensor | None,
                   scenario: Scenario) -> np.ndarray:
    """Per-axis moment law.

    M_d[j] = J_bar[j] * ( -k_R e_R[j] - k_Omega e_Omega[j]
                          - (Omega x R^T Rd Omega_d)[j] + (R^T Rd dOmega_d)[j]
                          - phi_bar[j] + (J^-1 Omega x J Omega)[j] )
    with the last term present only when the inertia is known.
    """
    RtRd = state.R.T @ cmd.Rd
    u = (-gains.k_R * np.asarray(e_R) - gains.k_Omega * np.asarray(e_Omega)
         - cross(state.Omega, RtRd @ cmd.Omega_d) + RtRd @ cmd.Omega_d_dot
         - np.asarray(phi_bar))
    if Scenario(scenario) is Scenario.KNOWN_INERTIA:
        u = u + gyroscopic_accel(state.Omega, J_true)
    return np.asarray(J_bar, dtype=float) * u
