"""Closed-loop policies for the 2-D model.

* :class:`DiscreteFlatnessController` plans over outputs only. Past inputs
  and the last ``r`` measurements pin the first ``r`` samples of the planned
  output trajectory, and the command is read off the plan with the
  output-to-input map.
* :class:`FlatnessMPC` is the triple-integrator (jerk) MPC baseline. Its
  velocity and acceleration come from finite differences of measurements,
  and feedback linearization turns the planned jerk into commands.
* :class:`PDController` is a proportional-derivative law on position and
  finite-differenced velocity.

All controllers run at a fixed step ``dt`` and command hover trim ``(0, 0)``
until their measurement history is full.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import HistoryIncompleteError
from .flatmaps import input_to_output_2d, output_to_input_2d
from .models import Params2D
from .path import ReferenceTrajectory
from .qp import KKTFactorization

WINDOW_2D = 3


def _weight(w) -> np.ndarray:
    """Accept a scalar, a diagonal, or a full 2x2 weight."""
    w = np.asarray(w, dtype=float)
    if w.ndim == 0:
        return w * np.eye(2)
    if w.ndim == 1:
        return np.diag(w)
    return w


@dataclass
class DFControllerConfig:
    horizon: int = 200
    Q: list = field(default_factory=lambda: [1.0, 1.0])
    R: list = field(default_factory=lambda: [1.5625e8, 1.5625e8])
    window: int = WINDOW_2D
    command_limit: float = 0.5

    def __post_init__(self):
        if self.window != WINDOW_2D:
            raise ValueError("the 2-D model has window r = 3")
        if self.horizon < self.window:
            raise ValueError("horizon must be at least the window length")


@dataclass
class FMPCConfig:
    horizon: int = 200
    Q: list = field(default_factory=lambda: [1.0, 1.0])
    R: list = field(default_factory=lambda: [1e-2, 1e-2])
    command_limit: float = 0.5


@dataclass
class PDConfig:
    kp: float = 0.15
    kd: float = 0.25
    command_limit: float = 0.5

    def __post_init__(self):
        if self.kp < 0 or self.kd < 0:
            raise ValueError("PD gains must be non-negative")


@dataclass
class ControllerHistory:
    """Last ``r`` measured outputs (oldest first) and last ``r - 1`` sent inputs."""

    window: int = WINDOW_2D
    outputs: deque = None
    inputs: deque = None

    def __post_init__(self):
        self.outputs = deque(maxlen=self.window)
        self.inputs = deque(maxlen=self.window - 1)

    @property
    def full(self) -> bool:
        return len(self.outputs) == self.window and len(self.inputs) == self.window - 1

    def push_output(self, y):
        self.outputs.append(np.asarray(y, dtype=float).copy())

    def push_input(self, u):
        self.inputs.append(np.asarray(u, dtype=float).copy())


# --------------------------------------------------------------------------
# discrete-flatness predictive control

def pinned_outputs(outputs, inputs, params: Params2D, dt: float) -> np.ndarray:
    """Outputs ``y_k .. y_{k+r-1}`` already fixed by measurements and past inputs.

    ``outputs`` holds ``y_{k-r+1} .. y_k`` and ``inputs`` holds
    ``u_{k-r+1} .. u_{k-1}``; each past input is pushed through the
    input-to-output map to extend the sequence by one sample.
    """
    seq = [np.asarray(y, dtype=float) for y in outputs]
    r = len(seq)
    for u in inputs:
        seq.append(input_to_output_2d(np.array(seq[-r:]), u, params, dt))
    return np.array(seq[r - 1:])


def df_qp_matrices(cfg: DFControllerConfig):
    """Hessian, constraint matrix and tracking block of the output-plan QP.

    Decision vector is ``[y_k, y_{k+1}, ..., y_{k+N}]`` flattened per step.
    The smoothness term penalizes third differences
    ``y_{j+3} - 3 y_{j+2} + 3 y_{j+1} - y_j`` for ``j = 0 .. N-3``.
    """
    N = cfg.horizon
    Q, R = _weight(cfg.Q), _weight(cfg.R)
    steps = N + 1
    track = np.kron(np.eye(steps), Q)
    D3 = np.zeros((N - 2, steps))
    for j in range(N - 2):
        D3[j, j:j + 4] = (-1.0, 3.0, -3.0, 1.0)
    D = np.kron(D3, np.eye(2))
    H = 2.0 * (track + D.T @ np.kron(np.eye(N - 2), R) @ D)
    H = 0.5 * (H + H.T)
    A = np.zeros((2 * cfg.window, 2 * steps))
    A[:, : 2 * cfg.window] = np.eye(2 * cfg.window)
    return H, A, track


def df_plan(history: ControllerHistory, reference: ReferenceTrajectory, cfg: DFControllerConfig,
            params: Params2D, dt: float, factorization: KKTFactorization | None = None,
            matrices=None):
    """Solve the output-plan QP and return ``(y_plan, qp_solution)``."""
    if not history.full:
        raise HistoryIncompleteError("controller history not full")
    N = cfg.horizon
    if len(reference.positions) < N + 1:
        raise ValueError("reference shorter than horizon + 1")
    H, A, track = matrices if matrices is not None else df_qp_matrices(cfg)
    if factorization is None:
        factorization = KKTFactorization(H, A)
    pins = pinned_outputs(history.outputs, history.inputs, params, dt)
    # the cost only sees differences, so solve relative to the current output
    origin = pins[0].copy()
    ref = (np.asarray(reference.positions[: N + 1], dtype=float) - origin).ravel()
    sol = factorization.solve(-2.0 * track @ ref, (pins - origin).ravel()).raise_for_status()
    return sol.y.reshape(N + 1, 2) + origin, sol


def df_predictive_step(history, reference, cfg: DFControllerConfig, params: Params2D, dt: float,
                       factorization=None, matrices=None) -> np.ndarray:
    """Command from the first four samples of the optimal output plan (unsaturated)."""
    plan, _ = df_plan(history, reference, cfg, params, dt, factorization, matrices)
    return output_to_input_2d(plan[:4], params, dt)


# --------------------------------------------------------------------------
# flatness MPC baseline

def flat_state_from_measurements(window, dt: float) -> np.ndarray:
    """``[[x, xd, xdd], [y, yd, ydd]]`` from the last three measurements.

    Rates are backward first-order differences, newest sample last.
    """
    w = np.asarray(window, dtype=float)
    vel = (w[2] - w[1]) / dt
    acc = (w[2] - 2.0 * w[1] + w[0]) / dt**2
    return np.stack([w[2], vel, acc], axis=-1)


def triple_integrator(dt: float):
    """Exact zero-order-hold discretization of a jerk-driven chain."""
    Ad = np.array([[1.0, dt, dt**2 / 2], [0.0, 1.0, dt], [0.0, 0.0, 1.0]])
    Bd = np.array([dt**3 / 6, dt**2 / 2, dt])
    return Ad, Bd


def fmpc_matrices(cfg: FMPCConfig, dt: float):
    """Condensed MPC over jerks ``v_0 .. v_{N-1}``.

    Positions obey ``Y = Phi @ z0 + Gamma @ V`` with ``Y = [y_1 .. y_N]`` and
    ``z0 = [p_x, p_y, v_x, v_y, a_x, a_y]``.
    """
    N = cfg.horizon
    Ad, Bd = triple_integrator(dt)
    phi = np.zeros((N, 3))
    markov = np.zeros(N)
    Ak = np.eye(3)
    for j in range(N):
        markov[j] = (Ak @ Bd)[0]
        Ak = Ad @ Ak
        phi[j] = Ak[0]
    gamma = np.zeros((N, N))
    for j in range(N):
        gamma[j, : j + 1] = markov[j::-1]
    Phi = np.kron(phi, np.eye(2))
    Gamma = np.kron(gamma, np.eye(2))
    QQ = np.kron(np.eye(N), _weight(cfg.Q))
    GtQ = Gamma.T @ QQ
    H = 2.0 * (GtQ @ Gamma + np.kron(np.eye(N), _weight(cfg.R)))
    H = 0.5 * (H + H.T)
    return H, GtQ @ Phi, GtQ


def feedback_linearize(flat_state, jerk, params: Params2D) -> np.ndarray:
    """Pitch/roll commands for a flat state and jerk under the first-order attitude model.

    Tilt angles follow from the horizontal accelerations as the 2-D model
    prescribes; angle rates follow by the chain rule, and the command is
    ``(tau * angle_rate + angle) / gain``.
    """
    g, psi = params.gravity, params.yaw
    acc, jrk = flat_state[:, 2], np.asarray(jerk, dtype=float)
    cp, sp = np.cos(psi), np.sin(psi)
    a = (acc[0] * cp + acc[1] * sp) / g
    a_dot = (jrk[0] * cp + jrk[1] * sp) / g
    pitch = np.arctan(a)
    pitch_dot = a_dot / (1.0 + a * a)
    b = (acc[0] * sp - acc[1] * cp) / g
    b_dot = (jrk[0] * sp - jrk[1] * cp) / g
    c = b * np.cos(pitch)
    c_dot = b_dot * np.cos(pitch) - b * np.sin(pitch) * pitch_dot
    roll = np.arctan(c)
    roll_dot = c_dot / (1.0 + c * c)
    return np.array(
        [
            (params.tau * pitch_dot + pitch) / params.gain,
            (params.tau * roll_dot + roll) / params.gain,
        ]
    )


def fmpc_step(flat_state, reference: ReferenceTrajectory, cfg: FMPCConfig, params: Params2D,
              dt: float, factorization=None, matrices=None) -> np.ndarray:
    """One FMPC update from a flat state; returns unsaturated commands."""
    N = cfg.horizon
    H, GtQPhi, GtQ = matrices if matrices is not None else fmpc_matrices(cfg, dt)
    if factorization is None:
        factorization = KKTFactorization(H)
    z0 = np.asarray(flat_state, dtype=float).T.ravel()  # [p_x, p_y, v_x, v_y, a_x, a_y]
    ref = np.asarray(reference.positions[1: N + 1], dtype=float).ravel()
    g = 2.0 * (GtQPhi @ z0 - GtQ @ ref)
    jerk = factorization.solve(g).raise_for_status().y[:2]
    return feedback_linearize(flat_state, jerk, params)


# --------------------------------------------------------------------------
# PD baseline

def pd_step(y, y_dot, y_ref, v_ref, kp: float, kd: float, yaw: float = 0.0,
            limit: float | None = None) -> np.ndarray:
    """PD law mapped to pitch/roll so positive pitch accelerates along +x at zero yaw."""
    w = -kp * (np.asarray(y, dtype=float) - y_ref) - kd * (np.asarray(y_dot, dtype=float) - v_ref)
    cp, sp = np.cos(yaw), np.sin(yaw)
    u = np.array([w[0] * cp + w[1] * sp, w[0] * sp - w[1] * cp])
    if limit is not None:
        u = np.clip(u, -limit, limit)
    return u


# --------------------------------------------------------------------------
# stateful wrappers used by the simulation harness

class DiscreteFlatnessController:
    name = "df"

    def __init__(self, cfg: DFControllerConfig, params: Params2D, dt: float):
        self.cfg, self.params, self.dt = cfg, params, dt
        self.horizon = cfg.horizon
        self._matrices = df_qp_matrices(cfg)
        self._kkt = KKTFactorization(self._matrices[0], self._matrices[1])
        self.reset()

    def reset(self):
        self.history = ControllerHistory(self.cfg.window)

    def step(self, y_meas, reference: ReferenceTrajectory) -> np.ndarray:
        self.history.push_output(y_meas)
        if self.history.full:
            u = df_predictive_step(self.history, reference, self.cfg, self.params, self.dt,
                                   self._kkt, self._matrices)
            u = np.clip(u, -self.cfg.command_limit, self.cfg.command_limit)
        else:
            u = np.zeros(2)
        self.history.push_input(u)
        return u


class FlatnessMPC:
    name = "fmpc"

    def __init__(self, cfg: FMPCConfig, params: Params2D, dt: float):
        self.cfg, self.params, self.dt = cfg, params, dt
        self.horizon = cfg.horizon
        self._matrices = fmpc_matrices(cfg, dt)
        self._kkt = KKTFactorization(self._matrices[0])
        self.reset()

    def reset(self):
        self.measurements = deque(maxlen=3)

    def step(self, y_meas, reference: ReferenceTrajectory) -> np.ndarray:
        self.measurements.append(np.asarray(y_meas, dtype=float).copy())
        if len(self.measurements) < 3:
            return np.zeros(2)
        z = flat_state_from_measurements(self.measurements, self.dt)
        u = fmpc_step(z, reference, self.cfg, self.params, self.dt, self._kkt, self._matrices)
        return np.clip(u, -self.cfg.command_limit, self.cfg.command_limit)


class PDController:
    name = "pd"
    horizon = 0

    def __init__(self, cfg: PDConfig, params: Params2D, dt: float):
        self.cfg, self.params, self.dt = cfg, params, dt
        self.reset()

    def reset(self):
        self.previous = None

    def step(self, y_meas, reference: ReferenceTrajectory) -> np.ndarray:
        y = np.asarray(y_meas, dtype=float)
        prev, self.previous = self.previous, y.copy()
        if prev is None:
            return np.zeros(2)
        return pd_step(y, (y - prev) / self.dt, reference.positions[0], reference.velocities[0],
                       self.cfg.kp, self.cfg.kd, self.params.yaw, self.cfg.command_limit)
