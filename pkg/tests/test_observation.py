"""Tests for the observation frame and history window."""

import numpy as np
import pytest

from src.env.observation import (
    ACTION_SLICE,
    CLOCK_SLICE,
    COMMAND_SLICE,
    FRAME_SIZE,
    GRAVITY_SLICE,
    QD_SLICE,
    Q_SLICE,
    ObservationWindow,
    build_frame,
    gravity_in_body,
    observe,
)
from src.physics.robot import RobotState
from src.schemas import ObservationConfig

DEFAULT_POSE = np.array([0.7, -1.4, 0.7, -1.4])


def make_state(model, num_envs=2):
    state = RobotState.standing(model, num_envs)
    qd = state.qd.copy()
    qd[:, 3:7] = [1.0, -2.0, 3.0, -4.0]
    return state.replace(qd=qd)


def test_frame_size():
    assert FRAME_SIZE == 19
    assert ObservationWindow(3, 40).size == 40 * 19


def test_gravity_in_body_level_and_pitched():
    np.testing.assert_allclose(gravity_in_body(np.array([0.0])), [[0.0, -1.0]], atol=1e-12)
    tilted = gravity_in_body(np.array([0.3]))
    np.testing.assert_allclose(np.linalg.norm(tilted, axis=-1), 1.0)


def test_noise_free_frame_layout(model):
    state = make_state(model)
    commands = np.array([[0.5, 0.0, 0.0], [0.3, 0.0, 0.0]])
    actions = np.array([[0.1, 0.2, 0.3, 0.4]] * 2)
    clock = np.array([[0.0, 1.0]] * 2)
    config = ObservationConfig()
    frame = build_frame(state, commands, actions, clock, model.default_pose, config)
    np.testing.assert_allclose(frame[:, Q_SLICE], 0.0, atol=1e-12)
    np.testing.assert_allclose(frame[0, QD_SLICE], config.qd_scale * np.array([1.0, -2.0, 3.0, -4.0]))
    np.testing.assert_allclose(frame[:, GRAVITY_SLICE], [[0.0, -1.0]] * 2, atol=1e-12)
    np.testing.assert_allclose(frame[:, COMMAND_SLICE], config.command_scale * commands)
    np.testing.assert_allclose(frame[:, ACTION_SLICE], actions)
    np.testing.assert_allclose(frame[:, CLOCK_SLICE], clock)


def test_noise_only_when_enabled(model):
    state = make_state(model)
    args = (state, np.zeros((2, 3)), np.zeros((2, 4)), np.zeros((2, 2)), DEFAULT_POSE)
    clean = build_frame(*args, ObservationConfig())
    noisy = build_frame(*args, ObservationConfig(), np.random.default_rng(0))
    disabled = build_frame(*args, ObservationConfig(add_noise=False), np.random.default_rng(0))
    assert not np.allclose(clean[:, :10], noisy[:, :10])
    np.testing.assert_array_equal(noisy[:, 10:], clean[:, 10:])
    np.testing.assert_array_equal(disabled, clean)


def test_window_is_zero_padded_and_shifts():
    window = ObservationWindow(1, 3)
    for value in (1.0, 2.0):
        window.push(np.full((1, FRAME_SIZE), value))
    frames = ObservationWindow.unflatten(window.flatten(), 3)
    np.testing.assert_array_equal(frames[0, :, 0], [0.0, 1.0, 2.0])
    window.push(np.full((1, FRAME_SIZE), 3.0))
    frames = ObservationWindow.unflatten(window.flatten(), 3)
    np.testing.assert_array_equal(frames[0, :, 0], [1.0, 2.0, 3.0])


def test_window_push_selected_envs():
    window = ObservationWindow(3, 2)
    window.push(np.ones((3, FRAME_SIZE)), env_ids=np.array([1]))
    flat = window.flatten()
    assert flat[0].sum() == 0.0
    assert flat[2].sum() == 0.0
    assert flat[1].sum() == pytest.approx(FRAME_SIZE)


def test_window_reset_selected_envs():
    window = ObservationWindow(2, 2)
    window.push(np.ones((2, FRAME_SIZE)))
    window.reset(np.array([0]))
    flat = window.flatten()
    assert flat[0].sum() == 0.0
    assert flat[1].sum() > 0.0


def test_observe_returns_flat_window(model):
    window = ObservationWindow(2, 4)
    state = make_state(model)
    obs = observe(window, state, np.zeros((2, 3)), np.zeros((2, 4)), np.zeros((2, 2)), default_pose=model.default_pose)
    assert obs.shape == (2, 4 * FRAME_SIZE)
    # Newest frame last
    np.testing.assert_allclose(obs[:, -FRAME_SIZE:][:, GRAVITY_SLICE], [[0.0, -1.0]] * 2, atol=1e-12)
    assert np.all(obs[:, : 3 * FRAME_SIZE] == 0.0)


def test_unobserved_envs_keep_their_noise_stream(model):
    state = make_state(model)
    rngs = [np.random.default_rng(1), np.random.default_rng(2)]
    window = ObservationWindow(2, 2)
    for _ in range(3):
        observe(
            window,
            state,
            np.zeros((2, 3)),
            np.zeros((2, 4)),
            np.zeros((2, 2)),
            noise_rng=rngs,
            default_pose=DEFAULT_POSE,
            env_ids=np.array([0]),
        )
    np.testing.assert_array_equal(rngs[1].standard_normal(5), np.random.default_rng(2).standard_normal(5))
    assert not np.array_equal(rngs[0].standard_normal(5), np.random.default_rng(1).standard_normal(5))
