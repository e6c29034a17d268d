"""Rotation matrices and Euler-angle kinematics.

Convention: ``R = Rz(yaw) @ Ry(pitch) @ Rx(roll)`` maps body to inertial
coordinates. The third column of ``R`` is the thrust direction, and the
pitch/roll extraction in :func:`euler_from_third_column` inverts it exactly.
"""

from __future__ import annotations

import numpy as np

from .errors import SingularAttitudeError

SINGULAR_EPS = 1e-6


def rotation_from_euler(roll: float, pitch: float, yaw: float) -> np.ndarray:
    """Body-to-inertial rotation matrix for Z-Y-X Euler angles."""
    cf, sf = np.cos(roll), np.sin(roll)
    ct, st = np.cos(pitch), np.sin(pitch)
    cp, sp = np.cos(yaw), np.sin(yaw)
    return np.array(
        [
            [cp * ct, cp * st * sf - sp * cf, cp * st * cf + sp * sf],
            [sp * ct, sp * st * sf + cp * cf, sp * st * cf - cp * sf],
            [-st, ct * sf, ct * cf],
        ]
    )


def tilt_ratios(pitch, roll, yaw):
    """Return ``(R13/R33, R23/R33)``; broadcasts over array arguments.

    These are the horizontal specific-force ratios of the 2-D model.
    """
    ct, st = np.cos(pitch), np.sin(pitch)
    cf, sf = np.cos(roll), np.sin(roll)
    cp, sp = np.cos(yaw), np.sin(yaw)
    r33 = ct * cf
    if np.any(r33 <= SINGULAR_EPS):
        raise SingularAttitudeError(f"R33 = {np.min(r33):.3g} outside chart")
    return (cp * st * cf + sp * sf) / r33, (sp * st * cf - cp * sf) / r33


def euler_from_third_column(r13, r23, r33, yaw, eps: float = SINGULAR_EPS):
    """Recover ``(pitch, roll)`` from the third column of ``R`` and the yaw.

    Only the ratios ``r13/r33`` and ``r23/r33`` are used, so the column does
    not have to be normalized. Arguments broadcast.

    Raises:
        SingularAttitudeError: if any ``r33 <= eps``.
    """
    r33 = np.asarray(r33, dtype=float)
    if np.any(r33 <= eps):
        raise SingularAttitudeError(f"r33 = {np.min(r33):.3g} <= {eps:g}")
    a = np.asarray(r13, dtype=float) / r33
    b = np.asarray(r23, dtype=float) / r33
    cp, sp = np.cos(yaw), np.sin(yaw)
    pitch = np.arctan(a * cp + b * sp)
    roll = np.arctan((a * sp - b * cp) * np.cos(pitch))
    return pitch, roll


def euler_rate_matrix(R: np.ndarray, yaw: float) -> np.ndarray:
    """Matrix mapping (roll, pitch, yaw) rates to the inertial angular velocity."""
    return np.array(
        [
            [np.cos(yaw), R[0, 1], 0.0],
            [np.sin(yaw), R[1, 1], 0.0],
            [0.0, R[2, 1], 1.0],
        ]
    )


def body_rates_from_euler_rates(R: np.ndarray, yaw: float, euler_rates) -> np.ndarray:
    """Body rates ``(p, q, r)`` from Euler rates ``(roll_dot, pitch_dot, yaw_dot)``.

    ``R`` must be orthonormal; its inverse is taken as the transpose.
    """
    return R.T @ (euler_rate_matrix(R, yaw) @ np.asarray(euler_rates, dtype=float))


def euler_rates_from_body_rates(R: np.ndarray, yaw: float, body_rates) -> np.ndarray:
    """Inverse of :func:`body_rates_from_euler_rates`."""
    # det of the rate matrix equals cos(roll) under this convention
    return np.linalg.solve(euler_rate_matrix(R, yaw), R @ np.asarray(body_rates, dtype=float))
