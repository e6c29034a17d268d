"""Randomized round-trip checks of the flat maps against the Euler plants."""

from __future__ import annotations

import numpy as np

from .flatmaps import (
    input_from_outputs_3d,
    input_to_output_2d,
    output_to_input_2d,
    state_from_outputs_2d,
    state_from_outputs_3d,
)
from .models import PITCH, ROLL, YAW, Params2D, Params3D, rollout


def _windows(outputs: np.ndarray, length: int) -> np.ndarray:
    return np.stack([outputs[i:i + length] for i in range(len(outputs) - length + 1)])


def _relative(estimate, truth) -> float:
    return float(np.max(np.abs(estimate - truth)) / np.max(np.abs(truth)))


def roundtrip_2d(trials=1000, steps=50, dt=0.02, command_bound=0.3, seed=0,
                 params: Params2D | None = None) -> dict:
    """Reconstruct inputs and states of random 2-D rollouts from outputs alone.

    Input error is normwise relative per input vector; state error is absolute.
    """
    rng = np.random.default_rng(seed)
    params = params or Params2D()
    worst_input = worst_state = 0.0
    for _ in range(trials):
        x0 = np.concatenate([rng.uniform(-5, 5, 4), rng.uniform(-0.2, 0.2, 2)])
        inputs = rng.uniform(-command_bound, command_bound, (steps, 2))
        states, outputs = rollout(x0, inputs, params, dt)
        rec_u = output_to_input_2d(_windows(outputs, 4), params, dt)
        err_u = np.max(np.abs(rec_u - inputs[: len(rec_u)]), axis=1) / np.max(np.abs(inputs[: len(rec_u)]), axis=1)
        rec_x = state_from_outputs_2d(_windows(outputs, 3), params, dt)
        worst_input = max(worst_input, float(err_u.max()))
        worst_state = max(worst_state, float(np.max(np.abs(rec_x - states[: len(rec_x)]))))
    return {"input_rel_error": worst_input, "state_abs_error": worst_state}


def roundtrip_3d(trials=500, steps=50, dt=0.02, torque_bound=0.01, thrust_spread=0.1,
                 seed=0, params: Params3D | None = None) -> dict:
    """Reconstruct thrust, torques and the 12-state of random 3-D rollouts."""
    rng = np.random.default_rng(seed)
    params = params or Params3D()
    hover = params.mass * params.gravity
    worst_thrust = worst_torque = worst_state = max_tilt = 0.0
    for _ in range(trials):
        x0 = np.zeros(12)
        x0[[0, 2, 4]] = rng.uniform(-5, 5, 3)
        x0[[1, 3, 5]] = rng.uniform(-1, 1, 3)
        x0[[PITCH, ROLL]] = rng.uniform(-0.2, 0.2, 2)
        x0[YAW] = rng.uniform(-np.pi, np.pi)
        x0[9:] = rng.uniform(-0.2, 0.2, 3)
        thrust = hover * (1 + rng.uniform(-thrust_spread, thrust_spread, steps))
        torques = rng.uniform(-torque_bound, torque_bound, (steps, 3))
        inputs = np.column_stack([thrust, torques])
        states, outputs = rollout(x0, inputs, params, dt)
        max_tilt = max(max_tilt, float(np.max(np.abs(states[:, [PITCH, ROLL]]))))
        for i in range(steps - 3):
            u = input_from_outputs_3d(outputs[i:i + 5], params, dt)
            worst_thrust = max(worst_thrust, abs(u[0] - inputs[i, 0]) / inputs[i, 0])
            worst_torque = max(worst_torque, _relative(u[1:], inputs[i, 1:]))
        for i in range(steps - 2):
            x = state_from_outputs_3d(outputs[i:i + 4], params, dt)
            worst_state = max(worst_state, float(np.max(np.abs(x - states[i]))))
    return {
        "thrust_rel_error": float(worst_thrust),
        "torque_rel_error": float(worst_torque),
        "state_abs_error": worst_state,
        "max_tilt": max_tilt,
    }


def random_windows_2d(rng, count: int, params: Params2D, dt: float):
    """Random 3-sample windows whose implied tilt stays inside the chart."""
    y0 = rng.uniform(-10, 10, (count, 2))
    v = rng.uniform(-5, 5, (count, 2))
    ratio = rng.uniform(-1, 1, (count, 2))
    y1 = y0 + dt * v
    y2 = 2 * y1 - y0 + params.gravity * dt**2 * ratio
    return np.stack([y0, y1, y2], axis=1)


def inverse_composition_2d(pairs=100_000, dt=0.02, command_bound=0.5, seed=0,
                           params: Params2D | None = None) -> dict:
    """Check ``F(w + F^-1(w, u)) = u`` and ``F^-1(w, F(w + y)) = y`` on random data."""
    rng = np.random.default_rng(seed)
    params = params or Params2D()
    w = random_windows_2d(rng, pairs, params, dt)
    u = rng.uniform(-command_bound, command_bound, (pairs, 2))
    y_next = input_to_output_2d(w, u, params, dt)
    u_back = output_to_input_2d(np.concatenate([w, y_next[:, None]], axis=1), params, dt)

    # a fourth sample whose second difference is also a reachable tilt
    ratio = rng.uniform(-1, 1, (pairs, 2))
    y3 = 2 * w[:, 2] - w[:, 1] + params.gravity * dt**2 * ratio
    u_mid = output_to_input_2d(np.concatenate([w, y3[:, None]], axis=1), params, dt)
    y_back = input_to_output_2d(w, u_mid, params, dt)
    return {
        "forward_error": float(np.max(np.abs(u_back - u))),
        "inverse_error": float(np.max(np.abs(y_back - y3))),
    }
