import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from discflat.models import (
    P, PITCH, Q, R, ROLL, YAW, ZD,
    Params2D, Params3D,
    derivative_2d, derivative_3d, euler_step, flat_output, hover_input_3d, rollout,
)


def test_hover_3d_is_equilibrium():
    p = Params3D()
    d = derivative_3d(np.zeros(12), hover_input_3d(p), p)
    np.testing.assert_array_equal(d, 0.0)


def test_double_thrust_accelerates_up():
    p = Params3D(mass=1.0, gravity=9.81)
    d = derivative_3d(np.zeros(12), [2 * 9.81, 0, 0, 0], p)
    assert d[ZD] == pytest.approx(9.81, abs=1e-12)
    assert d[1] == 0.0 and d[3] == 0.0


def test_gyroscopic_coupling():
    p = Params3D(mass=1.0, inertia=(1.0, 2.0, 3.0))
    s = np.zeros(12)
    s[[P, Q, R]] = (1.0, 0.0, 1.0)
    d = derivative_3d(s, [9.81, 0, 0, 0], p)
    assert d[Q] == pytest.approx(1.0, abs=1e-15)


def test_nonpositive_thrust_rejected():
    with pytest.raises(ValueError):
        derivative_3d(np.zeros(12), [0.0, 0, 0, 0], Params3D())


def test_2d_equilibrium_and_examples():
    p = Params2D()
    np.testing.assert_array_equal(derivative_2d(np.zeros(6), [0, 0], p), 0.0)
    s = np.zeros(6)
    s[4] = np.pi / 6
    d = derivative_2d(s, [np.pi / 6, 0], p)
    assert d[1] == pytest.approx(9.81 * np.tan(np.pi / 6), abs=1e-12)
    assert d[1] == pytest.approx(5.664, abs=1e-3)
    assert d[3] == pytest.approx(0.0, abs=1e-15)
    d = derivative_2d(np.zeros(6), [0.1, 0], Params2D(tau=0.5, gain=1.0))
    assert d[4] == pytest.approx(0.2, abs=1e-15)


def test_euler_step_linear_update():
    s = np.array([0.0, 2.0, 0, 0, 0, 0])
    assert euler_step(s, [0, 0], Params2D(), 0.005)[0] == pytest.approx(0.01, abs=1e-15)


def test_3d_hover_preserved_over_many_steps():
    p = Params3D()
    s0 = np.zeros(12)
    s0[[0, 2, 4, YAW]] = (1.0, -2.0, 3.0, 0.4)
    states, _ = rollout(s0, np.tile(hover_input_3d(p), (1000, 1)), p, 0.005)
    np.testing.assert_allclose(states, np.tile(s0, (1001, 1)), atol=1e-12)
    assert np.var(states[:, [0, 2, 4]], axis=0).max() == 0.0


def test_flat_output_selection():
    s = np.zeros(12)
    s[[0, 2, 4, YAW]] = (1, 2, 3, 0.4)
    np.testing.assert_array_equal(flat_output(s), [1, 2, 3, 0.4])
    np.testing.assert_array_equal(flat_output(np.array([5, 0, -1, 0, 0, 0.0])), [5, -1])


def test_empty_rollout():
    states, outputs = rollout(np.ones(6), np.zeros((0, 2)), Params2D(), 0.02)
    assert states.shape == (1, 6) and outputs.shape == (1, 2)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_zero_order_hold_matches_repeated_steps(substeps, seed):
    rng = np.random.default_rng(seed)
    p = Params2D()
    x0 = np.concatenate([rng.uniform(-5, 5, 4), rng.uniform(-0.2, 0.2, 2)])
    inputs = rng.uniform(-0.3, 0.3, (5, 2))
    states, outputs = rollout(x0, inputs, p, 0.02, substeps)
    s = x0.copy()
    manual = [s]
    for u in inputs:
        for _ in range(substeps):
            s = euler_step(s, u, p, 0.02 / substeps)
            manual.append(s)
    np.testing.assert_array_equal(states, np.array(manual))
    np.testing.assert_array_equal(outputs, flat_output(np.array(manual)[::substeps]))
