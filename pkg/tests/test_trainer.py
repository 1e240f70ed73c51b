"""Tests for the training loop."""

import numpy as np
import pandas as pd
import pytest

from src.env.locomotion_env import LocomotionEnv
from src.learner.checkpoint import load_checkpoint
from src.learner.network import forward
from src.learner.toy import ToyVelocityEnv, toy_ppo_config
from src.learner.trainer import train


def test_toy_env_contract():
    env = ToyVelocityEnv(num_envs=2, episode_steps=2)
    env.reset()
    env.step(np.zeros((2, 1)))
    _, reward, done, _ = env.step(np.zeros((2, 1)))
    assert done.all()
    assert (reward.total <= 0.0).all()


def test_short_toy_run_writes_artifacts(tmp_path):
    config = toy_ppo_config(iterations=3, checkpoint_interval=2, num_envs=4, steps_per_iteration=8)
    env = ToyVelocityEnv(num_envs=4, seed=0, episode_steps=5)
    result = train(env, config, seed=0, checkpoint_dir=tmp_path, stiffness_id="toy", stiffness=1.0)
    assert len(result.curve) == 3
    assert (tmp_path / "best.ckpt").exists()
    assert (tmp_path / "latest.ckpt").exists()
    assert (tmp_path / "iter_00002.ckpt").exists()
    curve = pd.read_csv(tmp_path / "learning_curve.csv")
    assert {"iteration", "mean_reward", "policy_loss", "value_loss", "approx_kl"} <= set(curve.columns)
    assert load_checkpoint(tmp_path / "latest.ckpt").iteration == 3


def test_same_seed_same_training(tmp_path):
    config = toy_ppo_config(iterations=2, num_envs=4, steps_per_iteration=8)
    first = train(ToyVelocityEnv(num_envs=4, seed=1), config, seed=1)
    second = train(ToyVelocityEnv(num_envs=4, seed=1), config, seed=1)
    np.testing.assert_array_equal(first.network.params, second.network.params)


@pytest.mark.slow
def test_toy_task_converges():
    env = ToyVelocityEnv(num_envs=16, seed=0)
    result = train(env, toy_ppo_config(), seed=0)
    velocities = np.linspace(-0.2, 1.5, 9)[:, None]
    push = forward(result.network, velocities).mean[:, 0]
    # Below the target the policy pushes forward, above it pushes back
    assert push[0] > 0.0
    assert push[-1] < 0.0
    assert result.curve["mean_reward"].iloc[-20:].mean() > result.curve["mean_reward"].iloc[:5].mean()


def test_locomotion_training_smoke(tmp_path, small_config, s5_spring):
    env = LocomotionEnv(small_config, s5_spring, small_config.learner.num_envs, seed=0)
    result = train(
        env, small_config.learner, seed=0, checkpoint_dir=tmp_path, stiffness_id="S5", stiffness=14500.0
    )
    assert len(result.curve) == small_config.learner.iterations
    assert "energy_per_meter" in result.curve.columns
    assert any(column.startswith("reward_tracking_lin_vel") for column in result.curve.columns)
    checkpoint = load_checkpoint(tmp_path / "best.ckpt", expected_obs_dim=env.obs_dim)
    assert checkpoint.stiffness_id == "S5"
