"""Closed-loop scenario runner."""

from __future__ import annotations

import logging
import time

import numpy as np

from ..controller import desired_rates, TrajectoryKind
from ..loop import ControlLoop, ReferenceLoop
from ..rigid_body import (RigidBodyState, Scenario, actual_moment, eval_disturbance,
                          gyroscopic_accel, step)
from ..so3 import angular_velocity_error, attitude_error, exp_so3, psi_R
from ..stability import estimation_lyapunov, reciprocal_inertia_error, state_lyapunov
from .config import SimConfig
from .trace import SimTrace, header

log = logging.getLogger(__name__)

ENGINES = {"fast": ControlLoop, "numpy": ReferenceLoop}


def make_loop(config: SimConfig, engine: str = "fast", neurons: int | None = None):
    try:
        cls = ENGINES[engine]
    except KeyError:
        raise ValueError(f"unknown engine {engine!r}") from None
    return cls(config.gains, config.sanm_params(neurons), config.sanm_initial(neurons),
               config.scenario, config.inertia, config.dt, config.controller_mode)


def _warm(config: SimConfig, engine: str) -> None:
    # first call of the compiled kernel loads it from cache; keep that out of the latency log
    if engine == "fast":
        spare = make_loop(config, engine)
        spare.step(np.eye(3), np.zeros(3), desired_rates(config.trajectory(), 0.0, config.dt), np.zeros(3))


def run_scenario(config: SimConfig, engine: str = "fast") -> SimTrace:
    """Simulate ``config`` and return its trace; a pure function of the config.

    Per period: command, SANM estimate + moment + adaptation, allocation,
    one plant step.  Each row logs the state at the start of the period
    together with the estimates the controller used during it.
    """
    rng = np.random.default_rng(config.seed)
    model = config.disturbance(rng)
    traj = config.trajectory()
    alloc = config.allocation()
    J = config.inertia
    scenario = config.scenario
    gains = config.gains
    eta = np.array(config["sanm.eta"])
    gamma = np.array(config["sanm.gamma"])
    s_omega = config["noise.omega_std"]
    s_att = config["noise.attitude_std"]
    dt = config.dt
    n = config.n_steps

    loop = make_loop(config, engine)
    _warm(config, engine)
    l = loop.neurons
    cols = header(l)
    data = np.empty((n, len(cols)))
    latency = np.empty(n, dtype=np.int64)

    hover_cmd = desired_rates(traj, 0.0, dt) if traj.kind is TrajectoryKind.FIXED_HOVER else None
    cmd0 = hover_cmd if hover_cmd is not None else desired_rates(traj, 0.0, dt)
    state = RigidBodyState(config.initial_attitude(rng, cmd0.Rd), np.array(config["init.omega"]), 0.0)
    n_sat = 0

    for k in range(n):
        t = k * dt
        state = RigidBodyState(state.R, state.Omega, t)
        cmd = hover_cmd if hover_cmd is not None else desired_rates(traj, t, dt)
        R, W = state.R, state.Omega
        if s_att > 0.0:
            R = R @ exp_so3(s_att * rng.standard_normal(3))
        if s_omega > 0.0:
            W = W + s_omega * rng.standard_normal(3)

        phi = eval_disturbance(model, state)
        if scenario is Scenario.UNKNOWN_INERTIA:
            phi = phi - gyroscopic_accel(state.Omega, J)
        J_used = np.array(loop.J_bar, dtype=float)
        W_used = np.array(loop.W, dtype=float)

        t0 = time.perf_counter_ns()
        M_d = loop.step(R, W, cmd, phi)
        latency[k] = time.perf_counter_ns() - t0
        M_d = np.array(M_d)

        if alloc is None:
            M, sat = M_d, False
        else:
            f_d = -float(traj.force(t) @ state.R[:, 2])
            res = actual_moment(alloc, M_d, f_d)
            M, sat = res.M, res.saturated
            n_sat += sat

        e_R = attitude_error(state.R, cmd.Rd)
        e_W = angular_velocity_error(state.Omega, state.R, cmd.Rd, cmd.Omega_d)
        psi = psi_R(state.R, cmd.Rd)
        V_s = state_lyapunov(psi, e_R, e_W, gains)
        V_e = estimation_lyapunov(reciprocal_inertia_error(J.vec, J_used), np.linalg.norm(W_used, axis=1),
                                  eta, gamma)
        row = data[k]
        row[0] = t
        row[1:10] = state.R.ravel()
        row[10:13] = state.Omega
        row[13:22] = cmd.Rd.ravel()
        row[22:25] = cmd.Omega_d
        row[25:28] = e_R
        row[28:31] = e_W
        row[31] = psi
        row[32:35] = M_d
        row[35:38] = M
        row[38:41] = M - M_d
        row[41:44] = phi
        row[44:47] = loop.phi_bar
        row[47:50] = J_used
        row[50:53] = np.linalg.norm(W_used, axis=1)
        row[53] = V_s
        row[54] = V_e
        row[55] = V_s + V_e
        row[56] = float(sat)
        row[57:] = W_used.ravel()

        state = step(state, M, J, model, scenario, dt)

    if n_sat:
        log.info("allocation saturated on %d of %d steps", n_sat, n)
    log.debug("run finished: %d steps, engine=%s", n, engine)
    return SimTrace(data, l, config_text=config.to_text(), latency_ns=latency)
