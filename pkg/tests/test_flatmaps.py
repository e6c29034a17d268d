import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from discflat.errors import WindowLengthError, ZeroThrustError
from discflat.flatmaps import (
    input_from_outputs_3d,
    input_to_output_2d,
    output_to_input_2d,
    state_from_outputs_2d,
    state_from_outputs_3d,
    thrust_vector,
)
from discflat.models import PITCH, ROLL, YAW, Params2D, Params3D, rollout
from discflat.verification import random_windows_2d

DT = 0.02
P2, P3 = Params2D(), Params3D()
seeds = st.integers(0, 2**32 - 1)


def _rollout_2d(rng, steps=12, params=P2):
    x0 = np.concatenate([rng.uniform(-5, 5, 4), rng.uniform(-0.2, 0.2, 2)])
    inputs = rng.uniform(-0.3, 0.3, (steps, 2))
    states, outputs = rollout(x0, inputs, params, DT)
    return states, outputs, inputs


def _rollout_3d(rng, steps=10):
    x0 = np.zeros(12)
    x0[[0, 2, 4]] = rng.uniform(-5, 5, 3)
    x0[[1, 3, 5]] = rng.uniform(-1, 1, 3)
    x0[[PITCH, ROLL]] = rng.uniform(-0.2, 0.2, 2)
    x0[YAW] = rng.uniform(-np.pi, np.pi)
    x0[9:] = rng.uniform(-0.2, 0.2, 3)
    hover = P3.mass * P3.gravity
    inputs = np.column_stack([hover * (1 + rng.uniform(-0.1, 0.1, steps)),
                              rng.uniform(-0.01, 0.01, (steps, 3))])
    states, outputs = rollout(x0, inputs, P3, DT)
    return states, outputs, inputs


# --- examples --------------------------------------------------------------

def test_thrust_vector_examples():
    np.testing.assert_allclose(thrust_vector(np.ones((3, 4)), 9.81, DT), [0, 0, 9.81], atol=1e-12)
    w = np.zeros((3, 4))
    w[:, 0] = (0, 0, 0.0004)
    np.testing.assert_allclose(thrust_vector(w, 9.81, DT), [1.0, 0, 9.81], atol=1e-12)


def test_free_fall_window_rejected():
    w = np.zeros((3, 4))
    w[:, 2] = (0.0, -0.5 * 9.81 * DT**2, -2 * 9.81 * DT**2)
    with pytest.raises(ZeroThrustError):
        thrust_vector(w, 9.81, DT)


def test_hover_trims_exact():
    w = np.tile([1.0, 2.0, 3.0, 0.4], (5, 1))
    u = input_from_outputs_3d(w, P3, DT)
    assert abs(u[0] - 1.5 * 9.81) <= 1e-12
    assert u[0] == pytest.approx(14.715, abs=1e-12)
    assert np.max(np.abs(u[1:])) <= 1e-12
    x = state_from_outputs_3d(w[:4], P3, DT)
    expected = np.zeros(12)
    expected[[0, 2, 4, YAW]] = (1, 2, 3, 0.4)
    np.testing.assert_allclose(x, expected, atol=1e-12)
    u2 = output_to_input_2d(np.tile([3.0, -7.0], (4, 1)), P2, DT)
    assert np.max(np.abs(u2)) <= 1e-12
    np.testing.assert_allclose(state_from_outputs_2d(np.tile([3.0, -7.0], (3, 1)), P2, DT),
                               [3, 0, -7, 0, 0, 0], atol=1e-12)


def test_constant_velocity_window_3d():
    w = np.zeros((4, 4))
    w[:, 0] = 0.5 * DT * np.arange(4)
    x = state_from_outputs_3d(w, P3, DT)
    assert x[1] == pytest.approx(0.5, abs=1e-12)
    np.testing.assert_allclose(x[6:], 0.0, atol=1e-12)


def test_vertical_acceleration_window():
    a = 2.0
    w = np.zeros((5, 4))
    w[:, 2] = 0.5 * a * (DT * np.arange(5)) ** 2
    u = input_from_outputs_3d(w, Params3D(mass=1.0), DT)
    assert u[0] == pytest.approx(a + 9.81, abs=1e-9)
    np.testing.assert_allclose(u[1:], 0.0, atol=1e-9)


def test_forty_five_degree_pitch_2d():
    w = np.zeros((3, 2))
    w[2, 0] = P2.gravity * DT**2
    x = state_from_outputs_2d(w, P2, DT)
    assert x[4] == pytest.approx(np.pi / 4, abs=1e-12)
    assert x[5] == pytest.approx(0.0, abs=1e-12)


def test_steady_tilt_gives_steady_command():
    params = Params2D(gain=0.8)
    ratio = np.tan(0.2)
    k = np.arange(4.0)
    w = np.zeros((4, 2))
    w[:, 0] = 0.5 * params.gravity * ratio * DT**2 * k * (k - 1) + 0.3 * k
    u = output_to_input_2d(w, params, DT)
    assert u[0] == pytest.approx(0.2 / 0.8, abs=1e-9)


def test_input_to_output_hover_fixed_point():
    w = np.tile([4.0, -1.0], (3, 1))
    np.testing.assert_allclose(input_to_output_2d(w, [0, 0], P2, DT), [4.0, -1.0], atol=1e-15)


# --- window strictness -----------------------------------------------------

@pytest.mark.parametrize("fn,length,width,params", [
    (lambda w: thrust_vector(w, 9.81, DT), 3, 4, None),
    (lambda w: state_from_outputs_3d(w, P3, DT), 4, 4, None),
    (lambda w: input_from_outputs_3d(w, P3, DT), 5, 4, None),
    (lambda w: state_from_outputs_2d(w, P2, DT), 3, 2, None),
    (lambda w: output_to_input_2d(w, P2, DT), 4, 2, None),
    (lambda w: input_to_output_2d(w, [0, 0], P2, DT), 3, 2, None),
])
def test_window_length_strict(fn, length, width, params):
    for bad in (length - 1, length + 1):
        with pytest.raises(WindowLengthError):
            fn(np.zeros((bad, width)))
    fn(np.zeros((length, width)))


def test_degenerate_dt_rejected():
    with pytest.raises(ValueError):
        state_from_outputs_2d(np.zeros((3, 2)), P2, 1e-7)


# --- rollout oracles -------------------------------------------------------

@settings(max_examples=60, deadline=None)
@given(seeds)
def test_round_trip_2d(seed):
    states, outputs, inputs = _rollout_2d(np.random.default_rng(seed))
    for k in range(len(inputs) - 2):
        u = output_to_input_2d(outputs[k:k + 4], P2, DT)
        assert np.max(np.abs(u - inputs[k])) <= 1e-9
        x = state_from_outputs_2d(outputs[k:k + 3], P2, DT)
        assert np.max(np.abs(x - states[k])) <= 1e-9
        nxt = input_to_output_2d(outputs[k:k + 3], inputs[k], P2, DT)
        np.testing.assert_allclose(nxt, outputs[k + 3], rtol=0, atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_round_trip_3d(seed):
    states, outputs, inputs = _rollout_3d(np.random.default_rng(seed))
    for k in range(len(inputs) - 3):
        u = input_from_outputs_3d(outputs[k:k + 5], P3, DT)
        assert abs(u[0] - inputs[k, 0]) <= 1e-7 * inputs[k, 0]
        assert np.max(np.abs(u[1:] - inputs[k, 1:])) <= 1e-7 * np.max(np.abs(inputs[k, 1:]))
        x = state_from_outputs_3d(outputs[k:k + 4], P3, DT)
        assert np.max(np.abs(x - states[k])) <= 1e-8


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_thrust_direction_matches_plant(seed):
    from discflat.rotation import rotation_from_euler
    states, outputs, _ = _rollout_3d(np.random.default_rng(seed), steps=4)
    t = thrust_vector(outputs[:3], P3.gravity, DT)
    col = rotation_from_euler(states[0, ROLL], states[0, PITCH], states[0, YAW])[:, 2]
    np.testing.assert_allclose(t / np.linalg.norm(t), col, atol=1e-9)


# --- properties ------------------------------------------------------------

@settings(max_examples=200, deadline=None)
@given(seeds, st.floats(-0.5, 0.5), st.floats(-0.5, 0.5))
def test_inverse_composition(seed, a, b):
    rng = np.random.default_rng(seed)
    w = random_windows_2d(rng, 1, P2, DT)[0]
    u = np.array([a, b])
    y = input_to_output_2d(w, u, P2, DT)
    assert np.max(np.abs(output_to_input_2d(np.vstack([w, y]), P2, DT) - u)) <= 1e-10
    y3 = 2 * w[2] - w[1] + P2.gravity * DT**2 * rng.uniform(-1, 1, 2)
    u3 = output_to_input_2d(np.vstack([w, y3]), P2, DT)
    assert np.max(np.abs(input_to_output_2d(w, u3, P2, DT) - y3)) <= 1e-10


@settings(max_examples=40, deadline=None)
@given(seeds, st.lists(st.floats(-100, 100), min_size=3, max_size=3))
def test_translation_invariance(seed, offset):
    rng = np.random.default_rng(seed)
    _, out2, _ = _rollout_2d(rng, steps=4)
    shift2 = np.asarray(offset[:2])
    np.testing.assert_allclose(output_to_input_2d(out2[:4] + shift2, P2, DT),
                               output_to_input_2d(out2[:4], P2, DT), atol=1e-7)
    x, xs = state_from_outputs_2d(out2[:3], P2, DT), state_from_outputs_2d(out2[:3] + shift2, P2, DT)
    np.testing.assert_allclose(xs[[1, 3, 4, 5]], x[[1, 3, 4, 5]], atol=1e-8)
    np.testing.assert_allclose(xs[[0, 2]], x[[0, 2]] + shift2, atol=1e-12)

    _, out3, _ = _rollout_3d(rng, steps=5)
    shift3 = np.append(offset, 0.0)
    u, us = input_from_outputs_3d(out3[:5], P3, DT), input_from_outputs_3d(out3[:5] + shift3, P3, DT)
    np.testing.assert_allclose(us, u, atol=1e-6)
    x, xs = state_from_outputs_3d(out3[:4], P3, DT), state_from_outputs_3d(out3[:4] + shift3, P3, DT)
    np.testing.assert_allclose(xs[[1, 3, 5, 6, 7, 8, 9, 10, 11]], x[[1, 3, 5, 6, 7, 8, 9, 10, 11]], atol=1e-7)


def test_batched_2d_matches_loop():
    rng = np.random.default_rng(3)
    w = random_windows_2d(rng, 20, P2, DT)
    u = rng.uniform(-0.3, 0.3, (20, 2))
    batched = input_to_output_2d(w, u, P2, DT)
    for i in range(20):
        np.testing.assert_array_equal(batched[i], input_to_output_2d(w[i], u[i], P2, DT))
