"""Numerical checks of the closed-loop Lyapunov argument.

All functions are pure post-processing over gains or logged traces.
The state norm used throughout is z_R = (|e_R|, |e_Omega|).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .controller import ControllerGains
from .so3 import attitude_error, psi_R as psi_of

PSI_CAP = 1.99
BOUNDARY_TOL = 1e-12


class InvalidPsi(ValueError):
    pass


class GainOrder(ValueError):
    """k_Omega must exceed c_R."""


class NoTransient(ValueError):
    """Trace never rises far enough above its residual ball to fit a decay."""


def _eigs(M: np.ndarray) -> tuple[float, float]:
    lo, hi = np.linalg.eigvalsh(M)
    return float(lo), float(hi)


def lower_bound_matrix(gains: ControllerGains) -> np.ndarray:
    return np.array([[gains.k_R / 2.0, -gains.c_R / 2.0],
                     [-gains.c_R / 2.0, 0.5]])


def upper_bound_matrix(gains: ControllerGains, psi: float) -> np.ndarray:
    return np.array([[gains.k_R / (2.0 - psi), gains.c_R / 2.0],
                     [gains.c_R / 2.0, 0.5]])


def decrease_matrix(gains: ControllerGains) -> np.ndarray:
    kR, kO, c = gains.k_R, gains.k_Omega, gains.c_R
    return np.array([[kR * c / 2.0, -kO * c / 2.0],
                     [-kO * c / 2.0, (kO - c) / 2.0]])


def c_R_bound(gains: ControllerGains, psi: float) -> float:
    kR, kO = gains.k_R, gains.k_Omega
    return min(kR * kO / (kO * kO + kR), math.sqrt(kR), math.sqrt(2.0 * kR / (2.0 - psi)), kO)


@dataclass(frozen=True)
class GainAuditReport:
    c_R_bound: float
    c_R_ok: bool
    eigs_M_R1: tuple[float, float]
    eigs_M_R2: tuple[float, float]
    eigs_M_R: tuple[float, float]
    all_pd: bool
    psi_R_used: float

    def lines(self) -> list[str]:
        return [
            f"psi_R_used={self.psi_R_used:.17g}",
            f"c_R_bound={self.c_R_bound:.17g}",
            f"c_R_ok={self.c_R_ok}",
            f"eigs_M_R1={self.eigs_M_R1[0]:.17g},{self.eigs_M_R1[1]:.17g}",
            f"eigs_M_R2={self.eigs_M_R2[0]:.17g},{self.eigs_M_R2[1]:.17g}",
            f"eigs_M_R={self.eigs_M_R[0]:.17g},{self.eigs_M_R[1]:.17g}",
            f"all_pd={self.all_pd}",
        ]


def check_gains(gains: ControllerGains, psi_R: float) -> GainAuditReport:
    """Gain feasibility for a sublevel bound psi_R in (0, 2)."""
    if not 0.0 < psi_R < 2.0:
        raise InvalidPsi(f"psi_R must lie in (0, 2), got {psi_R}")
    bound = c_R_bound(gains, psi_R)
    e1 = _eigs(lower_bound_matrix(gains))
    e2 = _eigs(upper_bound_matrix(gains, psi_R))
    e3 = _eigs(decrease_matrix(gains))
    return GainAuditReport(
        c_R_bound=bound,
        c_R_ok=gains.c_R < bound,
        eigs_M_R1=e1, eigs_M_R2=e2, eigs_M_R=e3,
        all_pd=min(e1[0], e2[0], e3[0]) > 0.0,
        psi_R_used=psi_R,
    )


@dataclass(frozen=True)
class LyapunovSample:
    t: float
    V_Rs: float
    V_Re: float
    V_R: float
    z_R_norm: float
    Vdot_fd: float = float("nan")


def state_lyapunov(psi: float, e_R, e_Omega, gains: ControllerGains) -> float:
    """V_R,s = k_R Psi + |e_Omega|^2 / 2 + c_R e_R . e_Omega."""
    e_R = np.asarray(e_R, dtype=float)
    e_Omega = np.asarray(e_Omega, dtype=float)
    return gains.k_R * psi + 0.5 * float(e_Omega @ e_Omega) + gains.c_R * float(e_R @ e_Omega)


def estimation_lyapunov(J_tilde, W_tilde_norms, eta, gamma) -> float:
    """V_R,e = sum_j eta_j J~_j^2 / 2 + |W~_j|^2 / (2 gamma_j)."""
    J_tilde = np.asarray(J_tilde, dtype=float)
    Wn = np.asarray(W_tilde_norms, dtype=float)
    return float(np.sum(0.5 * np.asarray(eta) * J_tilde ** 2 + Wn ** 2 / (2.0 * np.asarray(gamma))))


def reciprocal_inertia_error(J_true, J_bar) -> np.ndarray:
    return 1.0 / np.asarray(J_true, dtype=float) - 1.0 / np.asarray(J_bar, dtype=float)


def lyapunov_sample(psi: float, e_R, e_Omega, J_tilde, W_tilde_norms, gains: ControllerGains,
                    eta, gamma, t: float = 0.0) -> LyapunovSample:
    Vs = state_lyapunov(psi, e_R, e_Omega, gains)
    Ve = estimation_lyapunov(J_tilde, W_tilde_norms, eta, gamma)
    z = math.hypot(float(np.linalg.norm(e_R)), float(np.linalg.norm(e_Omega)))
    return LyapunovSample(t=t, V_Rs=Vs, V_Re=Ve, V_R=Vs + Ve, z_R_norm=z)


@dataclass(frozen=True)
class AttractionCheck:
    inside: bool
    converged_boundary: bool
    psi0: float
    psi_margin: float          # distance of Psi(0) from the half-turn set (2 - Psi)
    e_R_margin: float          # 1 - |e_R(0)|
    e_Omega_margin: float      # k_R (2 - Psi) - c_R^2/2 - |e_Omega(0)|^2


def check_attraction_domain(R0, Rd0, e_Omega0, gains: ControllerGains) -> AttractionCheck:
    psi0 = psi_of(R0, Rd0)
    eR = float(np.linalg.norm(attitude_error(R0, Rd0)))
    eW2 = float(np.dot(e_Omega0, e_Omega0))
    m_psi = 2.0 - psi0
    m_eR = 1.0 - eR
    m_eW = gains.k_R * (2.0 - psi0) - gains.c_R ** 2 / 2.0 - eW2
    boundary = psi0 <= BOUNDARY_TOL
    # |e_R| = sqrt(Psi (2 - Psi)) <= 1 holds identically and equals 1 on the
    # 90-degree shell, so that condition is applied non-strictly
    inside = m_psi > 0.0 and m_eR >= -BOUNDARY_TOL and m_eW > 0.0
    return AttractionCheck(inside, boundary, psi0, m_psi, m_eR, m_eW)


def c_r_constant(eps_R: float, eps_M: float, lambda_min_J: float, gains: ControllerGains) -> float:
    """Residual constant C_R of the bound dV/dt <= -lambda |z|^2 + C_R."""
    if gains.k_Omega <= gains.c_R:
        raise GainOrder(f"k_Omega={gains.k_Omega} <= c_R={gains.c_R}")
    a = eps_R + eps_M / lambda_min_J
    return gains.c_R * a * a / (2.0 * gains.k_R) + a * a / (2.0 * (gains.k_Omega - gains.c_R))


@dataclass(frozen=True)
class EnvelopeFit:
    alpha_hat: float
    beta_hat: float
    eps_hat: float
    residual: float
    n_fit: int
    floor: float = 0.0


def _log_line(tt: np.ndarray, z: np.ndarray, floor: float) -> tuple[float, float, float]:
    y = np.log(z - floor)
    slope, intercept = np.polyfit(tt, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * tt + intercept)) ** 2)))
    return float(slope), float(intercept), resid


def fit_envelope(t, z_norm, tail_fraction: float = 0.25, excess_ratio: float = 3.0) -> EnvelopeFit:
    """Fit |z(t)| <= alpha |z(0)| exp(-beta t) + eps to a sampled trace.

    eps_hat is the largest |z| over the final ``tail_fraction`` of the
    record.  The transient is the leading run of samples before |z| first
    drops below ``excess_ratio * eps_hat``.  On that window a line is fit
    to log(|z| - f), with the floor f in [0, eps_hat] chosen to minimise
    the line residual: a pure exponential picks f = 0, a decay onto a
    constant ball picks f = eps_hat.
    """
    t = np.asarray(t, dtype=float)
    z = np.asarray(z_norm, dtype=float)
    if len(t) < 100:
        raise ValueError("need at least 100 samples")
    if not 0.0 < tail_fraction <= 0.5:
        raise ValueError("tail_fraction must lie in (0, 0.5]")
    n_tail = max(1, int(round(tail_fraction * len(z))))
    eps = float(z[-n_tail:].max())
    if z[0] <= eps:
        raise NoTransient(f"|z(0)| = {z[0]:.3g} <= eps_hat = {eps:.3g}")
    below = np.nonzero(z <= excess_ratio * eps)[0]
    end = int(below[0]) if len(below) else len(z)
    if end < 3:
        raise NoTransient(f"|z| falls below {excess_ratio} * eps_hat within {end} samples")
    tt = t[:end] - t[0]
    zz = z[:end]
    res = minimize_scalar(lambda f: _log_line(tt, zz, f)[2], bounds=(0.0, eps),
                          method="bounded", options={"xatol": 1e-6 * eps})
    floor = float(res.x)
    slope, intercept, resid = _log_line(tt, zz, floor)
    return EnvelopeFit(alpha_hat=float(math.exp(intercept) / z[0]), beta_hat=-slope,
                       eps_hat=eps, residual=resid, n_fit=end, floor=floor)


@dataclass
class DecreaseReport:
    lambda_min: float
    C_R: float
    tol: float
    floor: float
    n_checked: int
    n_pass: int
    violation_times: list = field(default_factory=list)

    @property
    def fraction(self) -> float:
        return self.n_pass / self.n_checked if self.n_checked else 1.0

    def passed(self, required: float = 0.99) -> bool:
        return self.fraction >= required


def verify_decrease(t, V_R, z_norm, gains: ControllerGains, C_R: float = 0.0,
                    tail_fraction: float = 0.25, tol: float | None = None) -> DecreaseReport:
    """Pointwise check of dV_R/dt <= -lambda_min(M_R) |z|^2 + C_R + tol.

    dV/dt is a central difference on the (uniform) sample grid.  Only
    interior samples with |z| above the residual floor (max |z| over the
    trailing ``tail_fraction``) are checked.
    """
    t = np.asarray(t, dtype=float)
    V = np.asarray(V_R, dtype=float)
    z = np.asarray(z_norm, dtype=float)
    lam = _eigs(decrease_matrix(gains))[0]
    if tol is None:
        tol = 1e-4 * float(np.max(np.abs(V)))
    n_tail = max(1, int(round(tail_fraction * len(z))))
    floor = float(z[-n_tail:].max())
    Vdot = (V[2:] - V[:-2]) / (t[2:] - t[:-2])
    zi = z[1:-1]
    rhs = -lam * zi * zi + C_R + tol
    check = zi > floor
    ok = Vdot <= rhs
    bad = np.nonzero(check & ~ok)[0]
    return DecreaseReport(lambda_min=lam, C_R=C_R, tol=tol, floor=floor,
                          n_checked=int(check.sum()), n_pass=int((check & ok).sum()),
                          violation_times=[float(t[1 + i]) for i in bad])


def sandwich_constant_p1(V_Re, eps: float, gains: ControllerGains) -> float:
    """p1 = 1 + V_Re / (lambda_min(M_R1) eps^2)."""
    lam1 = _eigs(lower_bound_matrix(gains))[0]
    return 1.0 + float(np.max(V_Re)) / (lam1 * eps * eps)


def sandwich_constant_p2(V_Re, eps: float, gains: ControllerGains, psi: float) -> float:
    lam2 = _eigs(upper_bound_matrix(gains, psi))[1]
    return 1.0 + float(np.max(V_Re)) / (lam2 * eps * eps)


def analytic_rate(gains: ControllerGains, psi: float, p2: float) -> float:
    """beta = lambda_min(M_R) / (2 p2 lambda_max(M_R2))."""
    return _eigs(decrease_matrix(gains))[0] / (2.0 * p2 * _eigs(upper_bound_matrix(gains, psi))[1])


def default_psi(psi_trace) -> float:
    """Audit sublevel: the largest Psi seen on the trace, capped below 2."""
    m = float(np.max(psi_trace)) if len(psi_trace) else 0.0
    return min(max(m, 1e-12), PSI_CAP)
