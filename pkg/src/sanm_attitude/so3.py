"""SO(3) / so(3) algebra on plain numpy arrays.

Vectors are ``(3,)`` float arrays, matrices ``(3, 3)``.  Every function is
pure and returns fresh arrays.
"""

from __future__ import annotations

import math

import numpy as np

# Numeric tolerances used across the package.
SKEW_TOL = 1e-8          # vee(): max |symmetric part| accepted
ROTATION_TOL = 1e-9      # is_rotation(): max |R^T R - I| and |det R - 1|
SMALL_ANGLE = 1e-8       # exp/log: switch to series below this angle
POLAR_TOL = 1e-14        # orthonormalize(): polar iteration stop criterion
POLAR_MAX_ITERS = 50
REPAIR_RADIUS = 0.1      # orthonormalize(): max Frobenius distance to SO(3)

_EYE = np.eye(3)


class NonSkewInput(ValueError):
    """vee() was given a matrix that is not skew-symmetric."""


class TooFarFromSO3(ValueError):
    """orthonormalize() input lies outside the repair radius."""


def hat(v) -> np.ndarray:
    """Cross-product matrix: ``hat(a) @ b == np.cross(a, b)``."""
    x, y, z = float(v[0]), float(v[1]), float(v[2])
    return np.array([[0.0, -z, y],
                     [z, 0.0, -x],
                     [-y, x, 0.0]])


def vee(m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    asym = np.abs(m + m.T).max()
    if not asym <= SKEW_TOL:
        raise NonSkewInput(f"symmetric part {asym:.3e} exceeds {SKEW_TOL:.0e}")
    return np.array([m[2, 1], m[0, 2], m[1, 0]])


def cross(a, b) -> np.ndarray:
    # np.cross is ~10x slower than this for 3-vectors
    return np.array([a[1] * b[2] - a[2] * b[1],
                     a[2] * b[0] - a[0] * b[2],
                     a[0] * b[1] - a[1] * b[0]])


def exp_so3(v) -> np.ndarray:
    """Rodrigues' formula for ``expm(hat(v))``."""
    v = np.asarray(v, dtype=float)
    theta = math.sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
    K = hat(v)
    K2 = K @ K
    if theta < SMALL_ANGLE:
        return _EYE + K + 0.5 * K2
    a = math.sin(theta) / theta
    b = (1.0 - math.cos(theta)) / (theta * theta)
    return _EYE + a * K + b * K2


def log_so3(R) -> np.ndarray:
    """Rotation vector of ``R`` (inverse of exp_so3 for angles below pi)."""
    R = np.asarray(R, dtype=float)
    c = 0.5 * (R[0, 0] + R[1, 1] + R[2, 2] - 1.0)
    c = min(1.0, max(-1.0, c))
    theta = math.acos(c)
    w = np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
    if theta < SMALL_ANGLE:
        return 0.5 * w
    if math.pi - theta < 1e-6:
        # near a half-turn the antisymmetric part vanishes; use the symmetric part
        B = 0.5 * (R + R.T) - c * _EYE
        k = int(np.argmax(np.diag(B)))
        axis = B[:, k] / math.sqrt(max(B[k, k], 1e-300))
        axis /= np.linalg.norm(axis)
        if axis @ w < 0.0:
            axis = -axis
        return theta * axis
    return theta / (2.0 * math.sin(theta)) * w


def rotation_defect(R) -> float:
    """Largest of max|R^T R - I| and |det R - 1|."""
    R = np.asarray(R, dtype=float)
    ortho = np.abs(R.T @ R - _EYE).max()
    return float(max(ortho, abs(np.linalg.det(R) - 1.0)))


def is_rotation(R, tol: float = ROTATION_TOL) -> bool:
    R = np.asarray(R, dtype=float)
    return R.shape == (3, 3) and bool(np.isfinite(R).all()) and rotation_defect(R) <= tol


def _inv_transpose(R: np.ndarray) -> np.ndarray:
    r0, r1, r2 = R[0], R[1], R[2]
    cof = np.array([cross(r1, r2), cross(r2, r0), cross(r0, r1)])
    det = r0 @ cof[0]
    return cof / det


def orthonormalize(R) -> np.ndarray:
    """Nearest rotation by the iterated polar map ``R <- (R + R^-T) / 2``.

    Raises TooFarFromSO3 when the input is more than REPAIR_RADIUS
    (Frobenius) from the result, or has non-positive determinant.
    """
    R0 = np.asarray(R, dtype=float)
    if not np.isfinite(R0).all() or np.linalg.det(R0) <= 0.0:
        raise TooFarFromSO3("input is singular or reflects")
    X = R0
    for _ in range(POLAR_MAX_ITERS):
        Xn = 0.5 * (X + _inv_transpose(X))
        done = np.abs(Xn - X).max() <= POLAR_TOL
        X = Xn
        if done:
            break
    dist = float(np.linalg.norm(R0 - X))
    if dist > REPAIR_RADIUS:
        raise TooFarFromSO3(f"Frobenius distance {dist:.3g} > {REPAIR_RADIUS}")
    return X


def attitude_error(R, Rd) -> np.ndarray:
    """e_R = 1/2 (Rd^T R - R^T Rd)^vee."""
    Q = np.asarray(Rd).T @ np.asarray(R)
    return 0.5 * np.array([Q[2, 1] - Q[1, 2], Q[0, 2] - Q[2, 0], Q[1, 0] - Q[0, 1]])


def angular_velocity_error(Omega, R, Rd, Omega_d) -> np.ndarray:
    """e_Omega = Omega - R^T Rd Omega_d."""
    return np.asarray(Omega, dtype=float) - np.asarray(R).T @ (np.asarray(Rd) @ np.asarray(Omega_d))


def psi_R(R, Rd) -> float:
    """Configuration error 1/2 tr(I - Rd^T R), in [0, 2]."""
    Q = np.asarray(Rd).T @ np.asarray(R)
    psi = 0.5 * (3.0 - (Q[0, 0] + Q[1, 1] + Q[2, 2]))
    # roundoff can push the trace a few ulps past +-3
    return min(max(float(psi), 0.0), 2.0)


def error_rate_matrix(R, Rd) -> np.ndarray:
    """Y(Rd^T R) = 1/2 (tr(R^T Rd) I - R^T Rd), so that de_R/dt = Y e_Omega."""
    P = np.asarray(R).T @ np.asarray(Rd)
    return 0.5 * (np.trace(P) * _EYE - P)
