"""Euler-discretized multirotor plants.

State vectors are plain float arrays with the layouts

* 3-D: ``[x, xd, y, yd, z, zd, pitch, roll, yaw, p, q, r]``
* 2-D: ``[x, xd, y, yd, pitch, roll]``

Inputs are ``[T, tau_x, tau_y, tau_z]`` (3-D) and ``[pitch_cmd, roll_cmd]`` (2-D).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularAttitudeError
from .rotation import (
    SINGULAR_EPS,
    euler_rates_from_body_rates,
    rotation_from_euler,
    tilt_ratios,
)

# 3-D state indices
X, XD, Y, YD, Z, ZD, PITCH, ROLL, YAW, P, Q, R = range(12)
POS3 = [X, Y, Z]
VEL3 = [XD, YD, ZD]
# 2-D state indices
X2, XD2, Y2, YD2, PITCH2, ROLL2 = range(6)


@dataclass(frozen=True)
class Params3D:
    mass: float = 1.5
    gravity: float = 9.81
    inertia: tuple[float, float, float] = (0.03, 0.03, 0.05)

    def __post_init__(self):
        if self.mass <= 0 or self.gravity <= 0 or min(self.inertia) <= 0:
            raise ValueError("Params3D fields must be strictly positive")


@dataclass(frozen=True)
class Params2D:
    """First-order attitude model: ``tau * pitch_dot = gain * pitch_cmd - pitch``."""

    tau: float = 0.3
    gain: float = 1.0
    yaw: float = 0.0
    gravity: float = 9.81

    def __post_init__(self):
        if self.tau <= 0 or self.gain <= 0 or self.gravity <= 0:
            raise ValueError("tau, gain and gravity must be strictly positive")


def hover_input_3d(params: Params3D) -> np.ndarray:
    return np.array([params.mass * params.gravity, 0.0, 0.0, 0.0])


def derivative_3d(state, u, params: Params3D) -> np.ndarray:
    """Continuous-time vector field of the 12-state rigid-body model.

    Attitude angles are integrated through their Euler rates so that the
    discrete plant stays consistent with the output-based reconstruction.
    """
    s = np.asarray(state, dtype=float)
    thrust, tx, ty, tz = np.asarray(u, dtype=float)
    if thrust <= 0:
        raise ValueError("thrust must be positive")
    Ixx, Iyy, Izz = params.inertia
    Rm = rotation_from_euler(s[ROLL], s[PITCH], s[YAW])
    if Rm[2, 2] <= SINGULAR_EPS:
        raise SingularAttitudeError("attitude left the pitch/roll chart")
    acc = thrust / params.mass * Rm[:, 2] - np.array([0.0, 0.0, params.gravity])
    p, q, r = s[P], s[Q], s[R]
    roll_d, pitch_d, yaw_d = euler_rates_from_body_rates(Rm, s[YAW], (p, q, r))

    d = np.empty(12)
    d[X], d[Y], d[Z] = s[XD], s[YD], s[ZD]
    d[XD], d[YD], d[ZD] = acc
    d[PITCH], d[ROLL], d[YAW] = pitch_d, roll_d, yaw_d
    d[P] = -(Izz - Iyy) / Ixx * q * r + tx / Ixx
    d[Q] = -(Ixx - Izz) / Iyy * p * r + ty / Iyy
    d[R] = -(Iyy - Ixx) / Izz * p * q + tz / Izz
    return d


def derivative_2d(state, u, params: Params2D) -> np.ndarray:
    s = np.asarray(state, dtype=float)
    pitch_cmd, roll_cmd = np.asarray(u, dtype=float)
    ax, ay = tilt_ratios(s[PITCH2], s[ROLL2], params.yaw)
    k_tau = params.gain / params.tau
    return np.array(
        [
            s[XD2],
            params.gravity * ax,
            s[YD2],
            params.gravity * ay,
            k_tau * pitch_cmd - s[PITCH2] / params.tau,
            k_tau * roll_cmd - s[ROLL2] / params.tau,
        ]
    )


def _derivative(state, u, params):
    if isinstance(params, Params3D):
        return derivative_3d(state, u, params)
    if isinstance(params, Params2D):
        return derivative_2d(state, u, params)
    raise TypeError(f"unsupported params type {type(params).__name__}")


def euler_step(state, u, params, dt: float) -> np.ndarray:
    """One forward-Euler step ``x + dt * f(x, u)`` for either model."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    s = np.asarray(state, dtype=float)
    return s + dt * _derivative(s, u, params)


def flat_output(state) -> np.ndarray:
    """Flat output of a state: ``(x, y, z, yaw)`` in 3-D, ``(x, y)`` in 2-D."""
    s = np.asarray(state, dtype=float)
    if s.shape[-1] == 12:
        return s[..., [X, Y, Z, YAW]]
    if s.shape[-1] == 6:
        return s[..., [X2, Y2]]
    raise ValueError(f"state has unsupported length {s.shape[-1]}")


def rollout(state0, inputs, params, dt: float, substeps: int = 1):
    """Simulate a zero-order-hold input sequence.

    Each input is held for ``substeps`` plant steps of length ``dt / substeps``.

    Returns:
        states: ``(len(inputs) * substeps + 1, n)`` plant-rate states.
        outputs: ``(len(inputs) + 1, m)`` flat outputs sampled at the input rate.
    """
    if substeps < 1:
        raise ValueError("substeps must be >= 1")
    h = dt / substeps
    s = np.asarray(state0, dtype=float)
    states = [s]
    for u in inputs:
        for _ in range(substeps):
            s = euler_step(s, u, params, h)
            states.append(s)
    states = np.array(states)
    return states, flat_output(states[::substeps])
