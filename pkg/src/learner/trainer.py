"""Training loop: rollout collection alternating with PPO updates."""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import pandas as pd

from src.exceptions import NonFiniteLoss
from src.learner.checkpoint import save_checkpoint
from src.learner.network import NetworkSpec, PolicyNetwork, forward
from src.learner.ppo import Adam, RolloutBuffer, ppo_update, sample_action
from src.schemas import PpoConfig

logger = logging.getLogger(__name__)

CURVE_FLOAT_FORMAT = "%.10g"
PPO_STAT_COLUMNS = ["policy_loss", "value_loss", "entropy", "clip_fraction", "approx_kl", "grad_norm"]


@dataclass
class TrainingResult:
    network: PolicyNetwork
    curve: pd.DataFrame
    best_iteration: int
    best_reward: float


class _IterationTracker:
    """Per-iteration episode, reward-term and energy bookkeeping."""

    def __init__(self, num_envs: int):
        self.episode_return = np.zeros(num_envs)
        self.episode_length = np.zeros(num_envs, dtype=int)
        self.finished_lengths: List[int] = []
        self.finished_returns: List[float] = []
        self.term_sums: Dict[str, float] = {}
        self.samples = 0
        self.work = 0.0
        self.distance = 0.0
        self.faults = 0

    def start_iteration(self) -> None:
        self.finished_lengths = []
        self.finished_returns = []
        self.term_sums = {}
        self.samples = 0
        self.work = 0.0
        self.distance = 0.0
        self.faults = 0

    def record(self, reward, done: np.ndarray, info: Dict[str, Any], policy_dt: float) -> None:
        self.episode_return += reward.total
        self.episode_length += 1
        self.samples += reward.total.size
        for name, value in reward.weighted().items():
            self.term_sums[name] = self.term_sums.get(name, 0.0) + float(np.sum(value))

        if "torques" in info:
            torques = info["torques"]
            sample_dt = policy_dt / torques.shape[1]
            self.work += float(np.sum(np.maximum(torques * info["joint_velocity"], 0.0))) * sample_dt
            self.distance += float(np.sum(info["distance"]))
        if "fault" in info:
            self.faults += int(np.sum(info["fault"]))

        for env_id in np.flatnonzero(done):
            self.finished_lengths.append(int(self.episode_length[env_id]))
            self.finished_returns.append(float(self.episode_return[env_id]))
            self.episode_return[env_id] = 0.0
            self.episode_length[env_id] = 0

    def row(self, iteration: int, rewards: np.ndarray) -> Dict[str, Any]:
        row: Dict[str, Any] = {
            "iteration": iteration,
            "mean_reward": float(np.mean(rewards)),
            "mean_episode_length": (
                float(np.mean(self.finished_lengths)) if self.finished_lengths else float("nan")
            ),
            "mean_episode_return": (
                float(np.mean(self.finished_returns)) if self.finished_returns else float("nan")
            ),
            "episodes": len(self.finished_lengths),
            "faults": self.faults,
        }
        for name, total in self.term_sums.items():
            row[f"reward_{name}"] = total / max(self.samples, 1)
        row["energy_per_meter"] = self.work / self.distance if self.distance > 0 else float("nan")
        return row


def train(
    env,
    config: PpoConfig,
    total_iterations: Optional[int] = None,
    seed: int = 0,
    checkpoint_dir: Optional[Union[str, Path]] = None,
    network: Optional[PolicyNetwork] = None,
    stiffness_id: str = "",
    stiffness: float = 0.0,
) -> TrainingResult:
    """Train a policy with PPO on a batched environment.

    Args:
        env: Environment batch with reset/step, ``obs_dim``, ``action_dim``, ``num_envs``
            and ``policy_dt``
        config: PPO hyperparameters
        total_iterations: Number of rollout/update iterations (defaults to ``config.iterations``)
        seed: Seed for initialization, action sampling and minibatch shuffling
        checkpoint_dir: Where checkpoints and the learning curve go; nothing written when None
        network: Policy to continue training; a fresh one is built when None
        stiffness_id: Training spring recorded in checkpoints
        stiffness: Training spring stiffness in N/m

    Returns:
        TrainingResult with the final network and the learning curve

    Raises:
        NonFiniteLoss: The PPO update diverged
    """
    iterations = total_iterations or config.iterations
    rng = np.random.default_rng(seed)
    if network is None:
        spec = NetworkSpec.from_config(env.obs_dim, env.action_dim, config)
        network = PolicyNetwork(spec, seed=seed)
    optimizer = Adam.from_config(network.param_count, config)
    out_dir = Path(checkpoint_dir) if checkpoint_dir is not None else None

    def checkpoint(name: str, iteration: int) -> None:
        if out_dir is not None:
            save_checkpoint(out_dir / name, network, stiffness_id, stiffness, seed, iteration)

    buffer = RolloutBuffer(config.steps_per_iteration, env.num_envs, env.obs_dim, env.action_dim)
    tracker = _IterationTracker(env.num_envs)
    rows: List[Dict[str, Any]] = []
    best_reward = -np.inf
    best_iteration = 0

    logger.info(
        f"Training {iterations} iterations on {env.num_envs} envs x {config.steps_per_iteration} steps "
        f"({network.param_count} parameters, seed {seed})"
    )
    observation = env.reset()
    for iteration in range(1, iterations + 1):
        buffer.clear()
        tracker.start_iteration()
        for _ in range(config.steps_per_iteration):
            actions, log_probs, values = sample_action(network, observation, rng)
            next_observation, reward, done, info = env.step(actions)
            buffer.add(observation, actions, log_probs, values, reward.total, done)
            tracker.record(reward, done, info, env.policy_dt)
            if done.any():
                next_observation = env.reset(np.flatnonzero(done))
            observation = next_observation
        buffer.set_bootstrap(forward(network, observation).value)

        # best.ckpt holds the parameters that collected the best rollout
        mean_reward = float(np.mean(buffer.rewards))
        if mean_reward > best_reward:
            best_reward = mean_reward
            best_iteration = iteration
            checkpoint("best.ckpt", iteration)

        try:
            result = ppo_update(network, buffer, config, optimizer, rng, dump_dir=out_dir)
        except NonFiniteLoss as e:
            logger.error(f"Training aborted at iteration {iteration}: {e}")
            raise
        network.params = result.params

        row = tracker.row(iteration, buffer.rewards)
        row.update({name: result.stats[name] for name in PPO_STAT_COLUMNS})
        rows.append(row)

        if iteration % config.checkpoint_interval == 0:
            checkpoint(f"iter_{iteration:05d}.ckpt", iteration)
            logger.info(
                f"Iteration {iteration}/{iterations}: mean reward {row['mean_reward']:.4f}, "
                f"episodes {row['episodes']}"
            )
        if tracker.faults:
            logger.warning(f"Iteration {iteration}: {tracker.faults} environment fault(s) reset")

    checkpoint("latest.ckpt", iterations)
    curve = pd.DataFrame(rows)
    if out_dir is not None:
        write_learning_curve(curve, out_dir / "learning_curve.csv")
    logger.info(f"Training finished; best mean reward {best_reward:.4f} at iteration {best_iteration}")
    return TrainingResult(network=network, curve=curve, best_iteration=best_iteration, best_reward=best_reward)


def write_learning_curve(curve: pd.DataFrame, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    curve.to_csv(path, index=False, float_format=CURVE_FLOAT_FORMAT)
    return path
