"""Fused controller + SANM step compiled with numba.

This is the loop body the harness runs at 400 Hz and the one ``bench``
times.  It performs the same arithmetic as ``sanm_estimate`` ->
``compute_moment`` -> ``sanm_adapt`` from the numpy modules, on mutable
workspace arrays, and reports how many exp() calls it made.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .controller import AttitudeCommand, ControllerGains, compute_moment
from .rigid_body import InertiaTensor, RigidBodyState, Scenario
from .sanm import SanmParams, SanmState, gaussian_evaluations, sanm_adapt, sanm_estimate
from .so3 import angular_velocity_error, attitude_error


@njit(cache=True)
def _control_step(R, Omega, Rd, Od, Odd, k_R, k_O, c_R, known, J_true,
                  adapt, use_phi_ext, phi_ext,
                  centers, inv_2b2, gamma, r_w, W, J_bar, eta, scale, J_max, J_min, dt,
                  e_R, e_O, phi_bar, M_d, h):
    # Q = R^T Rd
    Q = np.empty((3, 3))
    for i in range(3):
        for j in range(3):
            Q[i, j] = R[0, i] * Rd[0, j] + R[1, i] * Rd[1, j] + R[2, i] * Rd[2, j]
    e_R[0] = 0.5 * (Q[1, 2] - Q[2, 1])
    e_R[1] = 0.5 * (Q[2, 0] - Q[0, 2])
    e_R[2] = 0.5 * (Q[0, 1] - Q[1, 0])
    a = np.empty(3)
    b = np.empty(3)
    for i in range(3):
        a[i] = Q[i, 0] * Od[0] + Q[i, 1] * Od[1] + Q[i, 2] * Od[2]
        b[i] = Q[i, 0] * Odd[0] + Q[i, 1] * Odd[1] + Q[i, 2] * Odd[2]
        e_O[i] = Omega[i] - a[i]
    wxa0 = Omega[1] * a[2] - Omega[2] * a[1]
    wxa1 = Omega[2] * a[0] - Omega[0] * a[2]
    wxa2 = Omega[0] * a[1] - Omega[1] * a[0]

    n_exp = 0
    L = W.shape[1]
    for j in range(3):
        if adapt:
            acc = 0.0
            for k in range(L):
                d0 = e_R[j] - centers[j, k, 0]
                d1 = e_O[j] - centers[j, k, 1]
                h[j, k] = math.exp(-(d0 * d0 + d1 * d1) * inv_2b2[j, k])
                n_exp += 1
                acc += W[j, k] * h[j, k]
            phi_bar[j] = acc
        elif use_phi_ext:
            phi_bar[j] = phi_ext[j]
        else:
            phi_bar[j] = 0.0

    u0 = -k_R * e_R[0] - k_O * e_O[0] - wxa0 + b[0] - phi_bar[0]
    u1 = -k_R * e_R[1] - k_O * e_O[1] - wxa1 + b[1] - phi_bar[1]
    u2 = -k_R * e_R[2] - k_O * e_O[2] - wxa2 + b[2] - phi_bar[2]
    if known:
        Jw0 = J_true[0] * Omega[0]
        Jw1 = J_true[1] * Omega[1]
        Jw2 = J_true[2] * Omega[2]
        u0 += (Omega[1] * Jw2 - Omega[2] * Jw1) / J_true[0]
        u1 += (Omega[2] * Jw0 - Omega[0] * Jw2) / J_true[1]
        u2 += (Omega[0] * Jw1 - Omega[1] * Jw0) / J_true[2]
    M_d[0] = J_bar[0] * u0
    M_d[1] = J_bar[1] * u1
    M_d[2] = J_bar[2] * u2

    if adapt:
        for j in range(3):
            s = e_O[j] + c_R * e_R[j]
            nn = 0.0
            for k in range(L):
                W[j, k] = W[j, k] + dt * (gamma[j] * s * h[j, k])
                nn += W[j, k] * W[j, k]
            n = math.sqrt(nn)
            if n > r_w:
                f = r_w / n
                for k in range(L):
                    W[j, k] = W[j, k] * f
            J = J_bar[j]
            p = s * M_d[j]
            J2 = J * J
            if p <= 0.0 and J >= J_max[j]:
                Jd = -scale[j] * J2 / eta[j]
            else:
                Jd = -(J2 / eta[j]) * p
            J = J + dt * Jd
            J_bar[j] = J if J > J_min else J_min
    return n_exp


class ControlLoop:
    """Owns the mutable SANM workspace for one closed-loop run.

    ``mode`` is ``"sanm"`` (adaptive), ``"off"`` (fixed J_bar, phi_bar = 0)
    or ``"oracle"`` (J_bar = true inertia, phi_bar supplied per step).
    """

    def __init__(self, gains: ControllerGains, params: SanmParams, initial: SanmState,
                 scenario: Scenario, J_true: InertiaTensor, dt: float, mode: str = "sanm"):
        if mode not in ("sanm", "off", "oracle"):
            raise ValueError(f"unknown controller mode {mode!r}")
        self.gains = gains
        self.params = params
        self.scenario = Scenario(scenario)
        self.J_true = J_true
        self.dt = float(dt)
        self.mode = mode
        self.centers = np.ascontiguousarray(params.centers, dtype=float)
        self.inv_2b2 = 1.0 / (2.0 * np.asarray(params.widths, dtype=float) ** 2)
        self.gamma = np.asarray(params.gamma, dtype=float)
        self.eta = np.asarray(params.eta, dtype=float)
        self.scale = np.asarray(params.scale, dtype=float)
        self.J_max = np.asarray(params.J_max, dtype=float)
        self.W = initial.weights.copy()
        self.J_bar = J_true.vec.copy() if mode == "oracle" else initial.J_bar.copy()
        self._Jt = J_true.vec.copy()
        l = self.W.shape[1]
        self.e_R = np.zeros(3)
        self.e_Omega = np.zeros(3)
        self.phi_bar = np.zeros(3)
        self.M_d = np.zeros(3)
        self.h = np.zeros((3, l))
        self._phi_ext = np.zeros(3)
        self.last_exp_count = 0

    @property
    def neurons(self) -> int:
        return self.W.shape[1]

    def step(self, R, Omega, cmd: AttitudeCommand, phi_ext=None) -> np.ndarray:
        """Errors, estimates, moment and adaptation for one period; returns M_d."""
        if phi_ext is not None:
            self._phi_ext[:] = phi_ext
        g = self.gains
        self.last_exp_count = _control_step(
            R, Omega, cmd.Rd, cmd.Omega_d, cmd.Omega_d_dot, g.k_R, g.k_Omega, g.c_R,
            self.scenario is Scenario.KNOWN_INERTIA, self._Jt,
            self.mode == "sanm", self.mode == "oracle", self._phi_ext,
            self.centers, self.inv_2b2, self.gamma, self.params.r_w, self.W, self.J_bar,
            self.eta, self.scale, self.J_max, self.params.J_min, self.dt,
            self.e_R, self.e_Omega, self.phi_bar, self.M_d, self.h)
        return self.M_d

    def sanm_state(self) -> SanmState:
        return self.params.initial_state(self.J_bar, self.W)


class ReferenceLoop:
    """Same contract as ControlLoop, built from the numpy modules.

    Slower, but every intermediate is an ordinary dataclass; used to
    cross-check the compiled kernel.
    """

    def __init__(self, gains: ControllerGains, params: SanmParams, initial: SanmState,
                 scenario: Scenario, J_true: InertiaTensor, dt: float, mode: str = "sanm"):
        if mode not in ("sanm", "off", "oracle"):
            raise ValueError(f"unknown controller mode {mode!r}")
        self.gains = gains
        self.scenario = Scenario(scenario)
        self.J_true = J_true
        self.dt = float(dt)
        self.mode = mode
        self.state = initial.with_J_bar(J_true.vec) if mode == "oracle" else initial
        self.e_R = np.zeros(3)
        self.e_Omega = np.zeros(3)
        self.phi_bar = np.zeros(3)
        self.M_d = np.zeros(3)
        self.last_exp_count = 0

    @property
    def J_bar(self) -> np.ndarray:
        return self.state.J_bar

    @property
    def W(self) -> np.ndarray:
        return self.state.weights

    @property
    def neurons(self) -> int:
        return self.state.neurons

    def step(self, R, Omega, cmd: AttitudeCommand, phi_ext=None) -> np.ndarray:
        before = gaussian_evaluations()
        self.e_R = attitude_error(R, cmd.Rd)
        self.e_Omega = angular_velocity_error(Omega, R, cmd.Rd, cmd.Omega_d)
        plant = RigidBodyState(np.asarray(R), np.asarray(Omega))
        if self.mode == "sanm":
            est = sanm_estimate(self.state, self.e_R, self.e_Omega)
            self.phi_bar = est.phi_bar
        elif self.mode == "oracle":
            self.phi_bar = np.array(phi_ext, dtype=float)
        else:
            self.phi_bar = np.zeros(3)
        self.M_d = compute_moment(self.e_R, self.e_Omega, plant, cmd, self.gains, self.state.J_bar,
                                  self.phi_bar, self.J_true, self.scenario)
        if self.mode == "sanm":
            self.state = sanm_adapt(self.state, self.e_R, self.e_Omega, self.M_d, self.gains.c_R,
                                    self.dt, est.activations)
        self.last_exp_count = gaussian_evaluations() - before
        return self.M_d

    def sanm_state(self) -> SanmState:
        return self.state
