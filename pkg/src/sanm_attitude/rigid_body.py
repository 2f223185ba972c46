"""Ground-truth attitude plant: dynamics, disturbances, rotor allocation, integrator."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .so3 import cross, exp_so3, orthonormalize

DEFAULT_DT = 0.0025
MAX_DT = 0.01


class Scenario(str, enum.Enum):
    """What the controller is allowed to know about the inertia tensor."""

    KNOWN_INERTIA = "known_inertia"
    UNKNOWN_INERTIA = "unknown_inertia"


class DisturbanceKind(str, enum.Enum):
    NONE = "none"
    SINUSOID = "sinusoid"
    PAYLOAD_PROXY = "payload_proxy"


class InfeasibleWrench(RuntimeError):
    """Rotor mixing asked for a thrust outside [0, max_thrust]."""


@dataclass(frozen=True)
class InertiaTensor:
    """Diagonal inertia, principal moments in kg m^2."""

    j1: float
    j2: float
    j3: float

    def __post_init__(self):
        if not (self.j1 > 0 and self.j2 > 0 and self.j3 > 0):
            raise ValueError("principal moments must be positive")

    @property
    def vec(self) -> np.ndarray:
        return np.array([self.j1, self.j2, self.j3])

    @property
    def min(self) -> float:
        return min(self.j1, self.j2, self.j3)

    @classmethod
    def from_vec(cls, v) -> "InertiaTensor":
        return cls(float(v[0]), float(v[1]), float(v[2]))


@dataclass(frozen=True)
class RigidBodyState:
    R: np.ndarray
    Omega: np.ndarray
    t: float = 0.0

    @classmethod
    def at_rest(cls, R=None) -> "RigidBodyState":
        return cls(np.eye(3) if R is None else np.asarray(R, dtype=float), np.zeros(3), 0.0)


@dataclass(frozen=True)
class DisturbanceModel:
    """External angular-acceleration disturbance (rad/s^2).

    ``payload_proxy`` adds ``coupling_gain * (Omega x e3) * |Omega|`` to the
    sinusoid, a state-coupled term standing in for a swinging payload.
    """

    kind: DisturbanceKind = DisturbanceKind.NONE
    amplitude: np.ndarray = field(default_factory=lambda: np.zeros(3))
    frequency: np.ndarray = field(default_factory=lambda: np.zeros(3))
    phase: np.ndarray = field(default_factory=lambda: np.zeros(3))
    coupling_gain: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", DisturbanceKind(self.kind))
        for name in ("amplitude", "frequency", "phase"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if not np.isfinite(self.amplitude).all():
            raise ValueError("disturbance amplitude must be finite")
        if (self.frequency < 0).any():
            raise ValueError("disturbance frequency must be >= 0")


def eval_disturbance(model: DisturbanceModel, state: RigidBodyState) -> np.ndarray:
    if model.kind is DisturbanceKind.NONE:
        return np.zeros(3)
    phi = model.amplitude * np.sin(2.0 * math.pi * model.frequency * state.t + model.phase)
    if model.kind is DisturbanceKind.PAYLOAD_PROXY:
        w = state.Omega
        speed = math.sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2])
        # (Omega x e3) = (w_y, -w_x, 0)
        phi = phi + model.coupling_gain * speed * np.array([w[1], -w[0], 0.0])
    return phi


# Quad-X layout, NED body frame. Rotor i sits at (x_i, y_i) * arm/sqrt(2);
# spin = +1 for props whose reaction torque yaws the body positively.
ROTOR_XY = np.array([[1.0, 1.0], [-1.0, -1.0], [1.0, -1.0], [-1.0, 1.0]])
ROTOR_SPIN = np.array([1.0, 1.0, -1.0, -1.0])


@dataclass(frozen=True)
class AllocationModel:
    """Rotor mixing with per-coefficient multiplicative errors.

    The allocator inverts the nominal mixing to get rotor commands
    (omega_i^2); the realized wrench uses the perturbed coefficients.
    """

    arm_length: float = 0.2
    thrust_coeff: np.ndarray = field(default_factory=lambda: np.ones(4))
    torque_coeff: np.ndarray = field(default_factory=lambda: np.full(4, 0.016))
    max_thrust: float = 8.0
    thrust_perturbation: np.ndarray = field(default_factory=lambda: np.zeros(4))
    torque_perturbation: np.ndarray = field(default_factory=lambda: np.zeros(4))
    arm_perturbation: float = 0.0
    clamp_tol: float = 1e-9

    def __post_init__(self):
        for name in ("thrust_coeff", "torque_coeff", "thrust_perturbation", "torque_perturbation"):
            arr = np.broadcast_to(np.asarray(getattr(self, name), dtype=float), (4,)).copy()
            object.__setattr__(self, name, arr)
        if self.arm_length <= 0 or (self.thrust_coeff <= 0).any() or (self.torque_coeff <= 0).any():
            raise ValueError("nominal allocation coefficients must be positive")
        perts = np.concatenate([self.thrust_perturbation, self.torque_perturbation, [self.arm_perturbation]])
        if (np.abs(perts) >= 0.5).any():
            raise ValueError("perturbations must lie in (-0.5, 0.5)")

    def mixing(self, perturbed: bool = False) -> np.ndarray:
        """4x4 map from rotor commands omega^2 to (f, M1, M2, M3)."""
        kT = self.thrust_coeff
        kQ = self.torque_coeff
        arm = self.arm_length
        if perturbed:
            kT = kT * (1.0 + self.thrust_perturbation)
            kQ = kQ * (1.0 + self.torque_perturbation)
            arm = arm * (1.0 + self.arm_perturbation)
        d = arm / math.sqrt(2.0)
        x = d * ROTOR_XY[:, 0]
        y = d * ROTOR_XY[:, 1]
        return np.array([kT, -y * kT, x * kT, ROTOR_SPIN * kQ])


@dataclass(frozen=True)
class AllocationResult:
    M: np.ndarray
    delta_M: np.ndarray
    f: float
    rotor_thrust: np.ndarray
    saturated: bool


def actual_moment(allocation: AllocationModel, M_d, f_d: float, strict: bool = False) -> AllocationResult:
    """Push (f_d, M_d) through mixing, rotor clamps and perturbed coefficients."""
    M_d = np.asarray(M_d, dtype=float)
    A_nom = allocation.mixing()
    wrench = np.concatenate([[f_d], M_d])
    w2 = np.linalg.solve(A_nom, wrench)
    thrust_cmd = allocation.thrust_coeff * w2
    lo = thrust_cmd < -allocation.clamp_tol
    hi = thrust_cmd > allocation.max_thrust + allocation.clamp_tol
    saturated = bool(lo.any() or hi.any())
    if saturated:
        if strict:
            raise InfeasibleWrench(f"rotor thrusts {thrust_cmd} outside [0, {allocation.max_thrust}]")
        thrust_cmd = np.clip(thrust_cmd, 0.0, allocation.max_thrust)
        w2 = thrust_cmd / allocation.thrust_coeff
    realized = allocation.mixing(perturbed=True) @ w2
    M = realized[1:]
    rotor_thrust = allocation.thrust_coeff * (1.0 + allocation.thrust_perturbation) * w2
    return AllocationResult(M=M, delta_M=M - M_d, f=float(realized[0]),
                            rotor_thrust=rotor_thrust, saturated=saturated)


def gyroscopic_accel(Omega, J: InertiaTensor) -> np.ndarray:
    """J^-1 (Omega x J Omega)."""
    Jv = J.vec
    return cross(Omega, Jv * Omega) / Jv


def omega_dot(state: RigidBodyState, M, J: InertiaTensor, phi, scenario: Scenario) -> np.ndarray:
    """Angular acceleration in the body frame.

    In the unknown-inertia form the gyroscopic term is expected inside
    ``phi``; see total_disturbance().
    """
    base = np.asarray(M, dtype=float) / J.vec + phi
    if Scenario(scenario) is Scenario.KNOWN_INERTIA:
        base = base - gyroscopic_accel(state.Omega, J)
    return base


def total_disturbance(model: DisturbanceModel, state: RigidBodyState, J: InertiaTensor,
                      scenario: Scenario) -> np.ndarray:
    """The phi fed to omega_dot so both scenarios simulate the same physics."""
    phi = eval_disturbance(model, state)
    if Scenario(scenario) is Scenario.UNKNOWN_INERTIA:
        phi = phi - gyroscopic_accel(state.Omega, J)
    return phi


def _dexpinv(theta: np.ndarray, w: np.ndarray) -> np.ndarray:
    # inverse right Jacobian, truncated after the theta^2 term (enough for RK4)
    tw = cross(theta, w)
    return w + 0.5 * tw + cross(theta, tw) / 12.0


def step(state: RigidBodyState, M, J: InertiaTensor, model: DisturbanceModel,
         scenario: Scenario, dt: float = DEFAULT_DT) -> RigidBodyState:
    """One RK4 step on (R, Omega) with M held constant.

    Attitude is propagated in exponential coordinates around the current R
    (Munthe-Kaas form), so every stage attitude is an exact rotation.
    """
    if not 0.0 < dt <= MAX_DT:
        raise ValueError(f"dt must lie in (0, {MAX_DT}], got {dt}")
    R0, W0, t0 = state.R, state.Omega, state.t
    M = np.asarray(M, dtype=float)

    def accel(R, W, t):
        s = RigidBodyState(R, W, t)
        return omega_dot(s, M, J, total_disturbance(model, s, J, scenario), scenario)

    h = dt
    k1t = W0
    k1w = accel(R0, W0, t0)

    th = 0.5 * h * k1t
    W = W0 + 0.5 * h * k1w
    k2t = _dexpinv(th, W)
    k2w = accel(R0 @ exp_so3(th), W, t0 + 0.5 * h)

    th = 0.5 * h * k2t
    W = W0 + 0.5 * h * k2w
    k3t = _dexpinv(th, W)
    k3w = accel(R0 @ exp_so3(th), W, t0 + 0.5 * h)

    th = h * k3t
    W = W0 + h * k3w
    k4t = _dexpinv(th, W)
    k4w = accel(R0 @ exp_so3(th), W, t0 + h)

    theta = (h / 6.0) * (k1t + 2.0 * k2t + 2.0 * k3t + k4t)
    W1 = W0 + (h / 6.0) * (k1w + 2.0 * k2w + 2.0 * k3w + k4w)
    R1 = orthonormalize(R0 @ exp_so3(theta))
    return RigidBodyState(R1, W1, t0 + dt)
