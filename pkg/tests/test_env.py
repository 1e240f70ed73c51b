"""Tests for the batched locomotion environment."""

import numpy as np
import pytest

from src.control.actuation import PdGains, action_to_target, pd_torque
from src.env.locomotion_env import LocomotionEnv, Termination, check_termination
from src.env.observation import FRAME_SIZE
from src.exceptions import EnvContractError
from src.physics.robot import RobotState
from src.physics.simulator import WorldParams, step
from src.schemas import RunConfig, SpringFootParams


@pytest.fixture
def env(small_config, s5_spring):
    return LocomotionEnv(small_config, s5_spring, num_envs=3, seed=11, mode="train")


def test_invalid_mode_raises(small_config, s5_spring):
    with pytest.raises(ValueError, match="Invalid mode"):
        LocomotionEnv(small_config, s5_spring, num_envs=1, mode="replay")


def test_env_seed_count_must_match(small_config, s5_spring):
    with pytest.raises(ValueError):
        LocomotionEnv(small_config, s5_spring, num_envs=2, env_seeds=[1])


def test_step_before_reset_raises(env):
    with pytest.raises(EnvContractError):
        env.step(np.zeros((3, 4)))


def test_reset_shape(env):
    obs = env.reset()
    assert env.obs_dim == 3 * FRAME_SIZE
    assert obs.shape == (3, env.obs_dim)
    assert not env.done.any()
    np.testing.assert_array_equal(env.time, 0.0)


def test_step_info_shapes(env, small_config):
    env.reset()
    obs, reward, done, info = env.step(np.zeros((3, 4)))
    decimation = small_config.actuation.decimation
    assert obs.shape == (3, env.obs_dim)
    assert reward.total.shape == (3,)
    assert done.shape == (3,)
    assert info["torques"].shape == (3, decimation, 4)
    assert info["joint_velocity"].shape == (3, decimation, 4)
    assert info["distance"].shape == (3,)
    assert info["schedule"].shape == (3, 2)
    np.testing.assert_allclose(info["time"], env.policy_dt)
    assert np.isfinite(reward.total).all()


def test_train_commands_within_range(env, small_config):
    env.reset()
    low, high = small_config.env.commands.train_v_x_range
    assert ((env.v_x_cmd >= low) & (env.v_x_cmd <= high)).all()


def test_inactive_env_is_untouched(env):
    env.reset()
    before = env.state.q[1].copy()
    active = np.array([True, False, True])
    _, reward, done, info = env.step(np.ones((3, 4)), active=active)
    np.testing.assert_array_equal(env.state.q[1], before)
    assert reward.total[1] == 0.0
    assert not done[1]
    np.testing.assert_array_equal(info["torques"][1], 0.0)
    np.testing.assert_array_equal(env.step_count, [1, 0, 1])


def test_eval_mode_is_nominal_and_deterministic(small_config, s5_spring):
    observations = []
    for _ in range(2):
        env = LocomotionEnv(small_config, s5_spring, num_envs=2, seed=5, mode="eval")
        env.reset()
        for _ in range(3):
            obs, _, _, _ = env.step(np.full((2, 4), 0.1))
        observations.append(obs)
        assert all(draw.kp_scale == 1.0 and draw.added_base_mass == 0.0 for draw in env.randomization)
        np.testing.assert_array_equal(env.v_x_cmd, small_config.env.commands.v_x_cmd)
    np.testing.assert_array_equal(observations[0], observations[1])


def test_episode_streams_follow_their_seed_not_their_slot(small_config, s5_spring):
    seeds = [np.random.SeedSequence(101), np.random.SeedSequence(202)]
    forward = LocomotionEnv(small_config, s5_spring, num_envs=2, mode="train", env_seeds=seeds)
    swapped = LocomotionEnv(small_config, s5_spring, num_envs=2, mode="train", env_seeds=seeds[::-1])
    obs_forward = forward.reset()
    obs_swapped = swapped.reset()
    np.testing.assert_allclose(obs_forward, obs_swapped[::-1], rtol=0, atol=1e-12)
    np.testing.assert_allclose(forward.v_x_cmd, swapped.v_x_cmd[::-1])


def test_timeout_finishes_episode(small_config, s5_spring):
    env = LocomotionEnv(small_config, s5_spring, num_envs=2, mode="eval", episode_length_s=0.1)
    env.reset()
    steps = int(round(0.1 / env.policy_dt))
    for _ in range(steps):
        _, _, done, info = env.step(np.zeros((2, 4)), active=~env.done)
    assert done.all()
    np.testing.assert_array_equal(info["termination"], Termination.TIMEOUT)
    with pytest.raises(EnvContractError):
        env.step(np.zeros((2, 4)))


def test_partial_reset(env):
    env.reset()
    env.step(np.zeros((3, 4)))
    env.reset([0])
    np.testing.assert_array_equal(env.step_count, [0, 1, 1])


def test_check_termination_grace_and_timeout(model):
    state = RobotState.standing(model, 3)
    q = state.q.copy()
    q[:, 2] = 1.5
    tilted = state.replace(q=q)
    time = np.array([0.1, 0.5, 1.0])
    status = check_termination(tilted, time, grace_period=0.2, episode_length=1.0)
    assert status[0] == Termination.RUNNING
    assert status[1] == Termination.FELL
    assert status[2] == Termination.FELL

    upright = check_termination(state, time, grace_period=0.2, episode_length=1.0)
    np.testing.assert_array_equal(upright, [Termination.RUNNING, Termination.RUNNING, Termination.TIMEOUT])


def test_low_base_counts_as_fall(model):
    state = RobotState.standing(model, 1)
    q = state.q.copy()
    q[:, 1] = 0.05
    status = check_termination(state.replace(q=q), np.array([1.0]), episode_length=5.0)
    assert status[0] == Termination.FELL


def test_eval_mode_matches_unrandomized_physics(small_config, s5_spring):
    """An eval episode is the nominal PD loop and physics, nothing more."""
    env = LocomotionEnv(small_config, s5_spring, num_envs=2, seed=3, mode="eval")
    env.reset()
    actuation = small_config.actuation
    model = env.base_model.with_payload(np.zeros(2), np.zeros(2))
    world = WorldParams.nominal(small_config.physics, 2)
    gains = PdGains.from_config(actuation)
    state = env.state
    action = np.tile([0.2, -0.1, 0.1, -0.2], (2, 1))

    for _ in range(3):
        target = action_to_target(
            action,
            model.default_pose,
            actuation.action_scale,
            clip=actuation.action_clip,
            joint_limits=model.joint_limits,
        )
        for _ in range(actuation.decimation):
            torque = pd_torque(target, state.joint_q, state.joint_qd, gains, model.torque_limit)
            state = step(state, torque, small_config.physics, model, world)
        env.step(action)
        assert np.array_equal(env.state.q, state.q)
        assert np.array_equal(env.state.qd, state.qd)


def test_distance_increments_sum_to_displacement(small_config, s5_spring):
    env = LocomotionEnv(small_config, s5_spring, num_envs=2, seed=8, mode="eval", episode_length_s=0.4)
    env.reset()
    start = env.state.base_x.copy()
    travelled = np.zeros(2)
    action = np.tile([0.3, -0.3, -0.3, 0.3], (2, 1))
    while not env.done.all():
        _, _, _, info = env.step(action, active=~env.done)
        travelled += info["distance"]
    np.testing.assert_allclose(travelled, env.state.base_x - start, rtol=0, atol=1e-12)


@pytest.mark.parametrize("stiffness_id", ["S1", "S5", "S8"])
def test_zero_action_keeps_robot_standing(stiffness_id):
    config = RunConfig()
    spring = SpringFootParams.from_ladder(stiffness_id)
    env = LocomotionEnv(config, spring, num_envs=2, seed=0, mode="eval", episode_length_s=3.0)
    env.reset()
    steps = int(round(2.0 / env.policy_dt))
    lowest = np.inf
    steepest = 0.0
    for _ in range(steps):
        _, _, done, _ = env.step(np.zeros((2, 4)))
        assert not done.any()
        lowest = min(lowest, env.state.base_z.min())
        steepest = max(steepest, np.abs(env.state.pitch).max())
    assert lowest > 0.2
    assert steepest < 0.2


def test_diverged_episode_ends_as_fault_without_raising(env, small_config):
    env.reset()
    qd = env.state.qd.copy()
    qd[0, 0] = 2.0 * small_config.physics.divergence_bound
    env.state = env.state.replace(qd=qd)
    _, reward, done, info = env.step(np.zeros((3, 4)))
    np.testing.assert_array_equal(info["fault"], [True, False, False])
    assert info["termination"][0] == Termination.FAULT
    assert done[0]
    assert reward.total[0] == 0.0
    assert np.isfinite(env.state.q).all()
