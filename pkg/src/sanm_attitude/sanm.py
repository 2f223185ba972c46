"""Sliced adaptive-neuro mapping (SANM).

Each body axis j owns two one-dimensional "slices":

* an inertia estimator J_bar[j] driven by a bounded adaptive law, and
* a 2-input RBF network estimating the disturbance feature phi_bar[j] from
  x_j = (e_R[j], e_Omega[j]).

Per control period the loop calls :func:`sanm_estimate` (one Gaussian per
neuron per axis), builds the moment from those estimates, and then calls
:func:`sanm_adapt` with the same activations and that moment.  The adapt
call is a forward-Euler step of the continuous laws, so the moment it
consumes is the one computed before the update.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

DEFAULT_R_W = 50.0
DEFAULT_J_MIN = 1e-4


class _EvalCounter:
    __slots__ = ("count",)

    def __init__(self):
        self.count = 0


_gaussians = _EvalCounter()


def gaussian_evaluations() -> int:
    """Total Gaussian (exp) evaluations performed by rbf_activation()."""
    return _gaussians.count


def reset_gaussian_counter() -> None:
    _gaussians.count = 0


@dataclass(frozen=True)
class RbfSlice:
    centers: np.ndarray   # (l, 2): (e_R, e_Omega) coordinates
    widths: np.ndarray    # (l,)
    weights: np.ndarray   # (l,)
    gamma: float
    r_w: float = DEFAULT_R_W

    def __post_init__(self):
        c = np.asarray(self.centers, dtype=float).reshape(-1, 2)
        b = np.broadcast_to(np.asarray(self.widths, dtype=float), (len(c),)).copy()
        w = np.broadcast_to(np.asarray(self.weights, dtype=float), (len(c),)).copy()
        if len(c) < 1:
            raise ValueError("an RBF slice needs at least one neuron")
        if (b <= 0).any():
            raise ValueError("RBF widths must be positive")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "widths", b)
        object.__setattr__(self, "weights", w)

    @property
    def neurons(self) -> int:
        return len(self.widths)


@dataclass(frozen=True)
class InertiaSlice:
    J_bar: float
    eta: float
    scale: float
    J_max: float
    J_min: float = DEFAULT_J_MIN

    def __post_init__(self):
        if not (0 < self.J_min <= self.J_bar and self.J_max > self.J_min):
            raise ValueError("need 0 < J_min <= J_bar and J_max > J_min")
        if self.eta <= 0 or self.scale <= 0:
            raise ValueError("eta and scale must be positive")


def rbf_activation(slice_: RbfSlice, x) -> np.ndarray:
    """h_k = exp(-|x - c_k|^2 / (2 b_k^2)), one exp per neuron."""
    d = np.asarray(x, dtype=float) - slice_.centers
    h = np.exp(-(d * d).sum(axis=1) / (2.0 * slice_.widths * slice_.widths))
    _gaussians.count += slice_.neurons
    return h


def nn_output(slice_: RbfSlice, x, h: np.ndarray | None = None) -> float:
    if h is None:
        h = rbf_activation(slice_, x)
    return float(slice_.weights @ h)


def weight_rate(slice_: RbfSlice, e_R_j: float, e_Omega_j: float, c_R: float,
                h: np.ndarray) -> np.ndarray:
    """dW/dt = gamma (e_Omega + c_R e_R) h."""
    return slice_.gamma * (e_Omega_j + c_R * e_R_j) * h


def project_weights(w: np.ndarray, r_w: float) -> np.ndarray:
    n = float(np.sqrt(w @ w))
    if n > r_w:
        return w * (r_w / n)
    return w


def update_weights(slice_: RbfSlice, e_R_j: float, e_Omega_j: float, c_R: float, dt: float,
                   h: np.ndarray | None = None) -> RbfSlice:
    if dt <= 0:
        raise ValueError("dt must be positive")
    if h is None:
        h = rbf_activation(slice_, (e_R_j, e_Omega_j))
    w = slice_.weights + dt * weight_rate(slice_, e_R_j, e_Omega_j, c_R, h)
    return replace(slice_, weights=project_weights(w, slice_.r_w))


def inertia_rate(slice_: InertiaSlice, e_R_j: float, e_Omega_j: float, M_d_j: float,
                 c_R: float) -> float:
    """Three-case bounded adaptive law for J_bar[j]."""
    s = e_Omega_j + c_R * e_R_j
    p = s * M_d_j
    J2 = slice_.J_bar * slice_.J_bar
    if p <= 0.0 and slice_.J_bar >= slice_.J_max:
        return -slice_.scale * J2 / slice_.eta
    return -(J2 / slice_.eta) * p


def update_inertia(slice_: InertiaSlice, e_R_j: float, e_Omega_j: float, M_d_j: float,
                   c_R: float, dt: float) -> InertiaSlice:
    if dt <= 0:
        raise ValueError("dt must be positive")
    J = slice_.J_bar + dt * inertia_rate(slice_, e_R_j, e_Omega_j, M_d_j, c_R)
    return replace(slice_, J_bar=max(J, slice_.J_min))


@dataclass(frozen=True)
class SanmState:
    rbf: tuple[RbfSlice, RbfSlice, RbfSlice]
    inertia: tuple[InertiaSlice, InertiaSlice, InertiaSlice]

    def __post_init__(self):
        if len(self.rbf) != 3 or len(self.inertia) != 3:
            raise ValueError("SANM has exactly three axes")

    @property
    def J_bar(self) -> np.ndarray:
        return np.array([s.J_bar for s in self.inertia])

    @property
    def weights(self) -> np.ndarray:
        return np.array([s.weights for s in self.rbf])

    @property
    def weight_norms(self) -> np.ndarray:
        return np.array([np.linalg.norm(s.weights) for s in self.rbf])

    @property
    def neurons(self) -> int:
        return self.rbf[0].neurons

    def with_weights(self, weights) -> "SanmState":
        weights = np.asarray(weights, dtype=float)
        return replace(self, rbf=tuple(replace(s, weights=w) for s, w in zip(self.rbf, weights)))

    def with_J_bar(self, J_bar) -> "SanmState":
        return replace(self, inertia=tuple(replace(s, J_bar=float(v)) for s, v in zip(self.inertia, J_bar)))


@dataclass(frozen=True)
class SanmEstimate:
    J_bar: np.ndarray
    phi_bar: np.ndarray
    activations: np.ndarray   # (3, l)


def sanm_estimate(state: SanmState, e_R, e_Omega) -> SanmEstimate:
    """Current (J_bar, phi_bar); costs 3*l Gaussian evaluations."""
    acts = np.array([rbf_activation(s, (e_R[j], e_Omega[j])) for j, s in enumerate(state.rbf)])
    phi = np.array([nn_output(s, None, h) for s, h in zip(state.rbf, acts)])
    return SanmEstimate(state.J_bar, phi, acts)


def sanm_adapt(state: SanmState, e_R, e_Omega, M_d, c_R: float, dt: float,
               activations: np.ndarray | None = None) -> SanmState:
    """Euler step of every slice's law, axes updated independently."""
    rbf = []
    inertia = []
    for j in range(3):
        h = None if activations is None else activations[j]
        rbf.append(update_weights(state.rbf[j], e_R[j], e_Omega[j], c_R, dt, h))
        inertia.append(update_inertia(state.inertia[j], e_R[j], e_Omega[j], M_d[j], c_R, dt))
    return SanmState(tuple(rbf), tuple(inertia))


def sanm_step(state: SanmState, e_R, e_Omega, M_d_prev, c_R: float,
              dt: float) -> tuple[SanmState, np.ndarray, np.ndarray]:
    """Adapt with the previous moment, then read out the new (J_bar, phi_bar).

    Standalone form of one SANM period.  The control loop splits this into
    sanm_estimate / sanm_adapt so the adaptation can use the moment of the
    current period instead.
    """
    acts = np.array([rbf_activation(s, (e_R[j], e_Omega[j])) for j, s in enumerate(state.rbf)])
    new = sanm_adapt(state, e_R, e_Omega, M_d_prev, c_R, dt, acts)
    phi = np.array([nn_output(s, None, h) for s, h in zip(new.rbf, acts)])
    return new, new.J_bar, phi


@dataclass(frozen=True)
class SanmParams:
    """Fixed per-axis slice parameters (everything except the adapted values)."""

    centers: np.ndarray      # (3, l, 2)
    widths: np.ndarray       # (3, l)
    gamma: np.ndarray        # (3,)
    eta: np.ndarray          # (3,)
    scale: np.ndarray        # (3,)
    J_max: np.ndarray        # (3,)
    J_min: float = DEFAULT_J_MIN
    r_w: float = DEFAULT_R_W

    def initial_state(self, J_bar0, weights0=None) -> SanmState:
        l = self.centers.shape[1]
        W = np.zeros((3, l)) if weights0 is None else np.asarray(weights0, dtype=float)
        rbf = tuple(RbfSlice(self.centers[j], self.widths[j], W[j], float(self.gamma[j]), self.r_w)
                    for j in range(3))
        inertia = tuple(InertiaSlice(float(J_bar0[j]), float(self.eta[j]), float(self.scale[j]),
                                     float(self.J_max[j]), self.J_min) for j in range(3))
        return SanmState(rbf, inertia)


def grid_centers(l: int, e_R_span: float, e_Omega_span: float) -> np.ndarray:
    """l centers on the diagonal segment [-span, span] of the (e_R, e_Omega) plane."""
    return np.column_stack([np.linspace(-e_R_span, e_R_span, l),
                            np.linspace(-e_Omega_span, e_Omega_span, l)])
