"""Maps between windows of flat outputs and states/inputs.

An output window is an array whose second-to-last axis indexes consecutive
samples ``y_k, y_{k+1}, ...`` spaced ``dt`` apart. 3-D samples are
``(x, y, z, yaw)``; 2-D samples are ``(x, y)``. The 2-D maps broadcast over
any leading batch axes.

Everything here is exact for the forward-Euler plants in :mod:`discflat.models`
when the window is sampled at the plant step.
"""

from __future__ import annotations

import numpy as np

from .errors import WindowLengthError, ZeroThrustError
from .models import Params2D, Params3D, flat_output  # noqa: F401  (re-exported)
from .rotation import (
    body_rates_from_euler_rates,
    euler_from_third_column,
    rotation_from_euler,
    tilt_ratios,
)

MIN_DT = 1e-6
THRUST_EPS = 1e-6


def _check(window, length: int, width: int, dt: float) -> np.ndarray:
    w = np.asarray(window, dtype=float)
    if w.ndim < 2 or w.shape[-2] != length or w.shape[-1] != width:
        raise WindowLengthError(
            f"expected window of {length} samples x {width}, got shape {w.shape}"
        )
    if not dt > MIN_DT:
        raise ValueError(f"dt must exceed {MIN_DT:g} s")
    return w


def _second_difference(w: np.ndarray) -> np.ndarray:
    return w[..., 2, :] - 2.0 * w[..., 1, :] + w[..., 0, :]


# --------------------------------------------------------------------------
# 3-D model, window r = 4

def thrust_vector(window, gravity: float, dt: float) -> np.ndarray:
    """Mass-normalized thrust vector ``T/m * R[:, 2]`` from three samples."""
    w = _check(window, 3, 4, dt)
    t = _second_difference(w[..., :3]) / dt**2
    t[..., 2] += gravity
    if np.any(np.linalg.norm(t, axis=-1) <= THRUST_EPS):
        raise ZeroThrustError("thrust vector vanished; attitude undefined")
    return t


def _attitude_3d(w3: np.ndarray, params: Params3D, dt: float):
    t = thrust_vector(w3, params.gravity, dt)
    t = t / np.linalg.norm(t)
    yaw = w3[0, 3]
    pitch, roll = euler_from_third_column(t[0], t[1], t[2], yaw)
    return float(roll), float(pitch), float(yaw)


def _body_rates_3d(angles0, angles1, dt):
    roll0, pitch0, yaw0 = angles0
    roll1, pitch1, yaw1 = angles1
    rates = np.array([roll1 - roll0, pitch1 - pitch0, yaw1 - yaw0]) / dt
    return body_rates_from_euler_rates(rotation_from_euler(*angles0), yaw0, rates)


def state_from_outputs_3d(window, params: Params3D, dt: float) -> np.ndarray:
    """Full 12-state at the first sample of a 4-sample window."""
    w = _check(window, 4, 4, dt)
    a0 = _attitude_3d(w[0:3], params, dt)
    a1 = _attitude_3d(w[1:4], params, dt)
    vel = (w[1, :3] - w[0, :3]) / dt
    pqr = _body_rates_3d(a0, a1, dt)
    roll, pitch, yaw = a0
    x, y, z = w[0, :3]
    return np.array([x, vel[0], y, vel[1], z, vel[2], pitch, roll, yaw, *pqr])


def input_from_outputs_3d(window, params: Params3D, dt: float) -> np.ndarray:
    """``[T, tau_x, tau_y, tau_z]`` at the first sample of a 5-sample window."""
    w = _check(window, 5, 4, dt)
    thrust = params.mass * np.linalg.norm(thrust_vector(w[0:3], params.gravity, dt))
    angles = [_attitude_3d(w[i:i + 3], params, dt) for i in range(3)]
    p0, q0, r0 = _body_rates_3d(angles[0], angles[1], dt)
    p1, q1, r1 = _body_rates_3d(angles[1], angles[2], dt)
    Ixx, Iyy, Izz = params.inertia
    return np.array(
        [
            thrust,
            Ixx * (p1 - p0) / dt + (Izz - Iyy) * q0 * r0,
            Iyy * (q1 - q0) / dt + (Ixx - Izz) * p0 * r0,
            Izz * (r1 - r0) / dt + (Iyy - Ixx) * p0 * q0,
        ]
    )


# --------------------------------------------------------------------------
# 2-D model, window r = 3

def _attitude_2d(w3: np.ndarray, params: Params2D, dt: float):
    ratio = _second_difference(w3) / (params.gravity * dt**2)
    return euler_from_third_column(ratio[..., 0], ratio[..., 1], 1.0, params.yaw)


def state_from_outputs_2d(window, params: Params2D, dt: float) -> np.ndarray:
    """``[x, xd, y, yd, pitch, roll]`` at the first sample of a 3-sample window."""
    w = _check(window, 3, 2, dt)
    pitch, roll = _attitude_2d(w, params, dt)
    vel = (w[..., 1, :] - w[..., 0, :]) / dt
    return np.stack(
        [w[..., 0, 0], vel[..., 0], w[..., 0, 1], vel[..., 1], pitch, roll], axis=-1
    )


def output_to_input_2d(window, params: Params2D, dt: float) -> np.ndarray:
    """Output-to-input map: ``(pitch_cmd, roll_cmd)`` from four samples.

    Commands invert the discretized first-order attitude response
    ``a_{k+1} = a_k + dt/tau * (gain * cmd - a_k)``.
    """
    w = _check(window, 4, 2, dt)
    pitch0, roll0 = _attitude_2d(w[..., 0:3, :], params, dt)
    pitch1, roll1 = _attitude_2d(w[..., 1:4, :], params, dt)
    lead = params.tau / dt
    pitch_cmd = (lead * (pitch1 - pitch0) + pitch0) / params.gain
    roll_cmd = (lead * (roll1 - roll0) + roll0) / params.gain
    return np.stack([pitch_cmd, roll_cmd], axis=-1)


def input_to_output_2d(window, u, params: Params2D, dt: float) -> np.ndarray:
    """Input-to-output map: the sample following a 3-sample window under ``u``.

    Raises:
        SingularAttitudeError: if the propagated attitude leaves the chart.
    """
    w = _check(window, 3, 2, dt)
    u = np.asarray(u, dtype=float)
    pitch0, roll0 = _attitude_2d(w, params, dt)
    alpha = dt / params.tau
    pitch1 = pitch0 + alpha * (params.gain * u[..., 0] - pitch0)
    roll1 = roll0 + alpha * (params.gain * u[..., 1] - roll0)
    ax, ay = tilt_ratios(pitch1, roll1, params.yaw)
    step = params.gravity * dt**2 * np.stack([ax, ay], axis=-1)
    return 2.0 * w[..., 2, :] - w[..., 1, :] + step
