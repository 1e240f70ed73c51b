"""One-dimensional velocity-matching task for exercising the learner quickly.

A unit point mass is pushed by the action; the reward is -(v - 1)^2. It speaks the
same reset/step protocol as the locomotion environment, so the trainer runs on it
unchanged.
"""

from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from src.env.rewards import RewardBreakdown
from src.exceptions import EnvContractError
from src.schemas import PpoConfig

TOY_TARGET_VELOCITY = 1.0


def toy_ppo_config(**overrides: Any) -> PpoConfig:
    """PPO settings that converge on the toy task within a couple of hundred iterations."""
    values = {
        "learning_rate": 1.0e-3,
        "entropy_coef": 0.0,
        "hidden_sizes": (32, 32),
        "num_envs": 16,
        "steps_per_iteration": 32,
        "epochs": 5,
        "minibatches": 4,
        "init_log_std": -0.5,
        "iterations": 200,
    }
    values.update(overrides)
    return PpoConfig(**values)


class ToyVelocityEnv:
    """Batched double integrator: v' = v + dt * action_scale * a."""

    action_dim = 1
    obs_dim = 1

    def __init__(
        self,
        num_envs: int,
        seed: int = 0,
        dt: float = 0.1,
        action_scale: float = 2.0,
        episode_steps: int = 100,
    ):
        self.num_envs = num_envs
        self.policy_dt = dt
        self.action_scale = action_scale
        self.episode_steps = episode_steps
        self.rng = np.random.default_rng(seed)
        self.velocity = np.zeros(num_envs)
        self.step_count = np.zeros(num_envs, dtype=int)
        self.done = np.ones(num_envs, dtype=bool)

    def _observe(self) -> np.ndarray:
        return self.velocity[:, None].copy()

    def reset(self, env_ids: Optional[Sequence[int]] = None) -> np.ndarray:
        ids = np.arange(self.num_envs) if env_ids is None else np.asarray(env_ids, dtype=int)
        self.velocity[ids] = self.rng.uniform(-0.2, 0.2, ids.size)
        self.step_count[ids] = 0
        self.done[ids] = False
        return self._observe()

    def step(
        self, actions: np.ndarray, active: Optional[np.ndarray] = None
    ) -> Tuple[np.ndarray, RewardBreakdown, np.ndarray, Dict[str, Any]]:
        active = np.ones(self.num_envs, dtype=bool) if active is None else np.asarray(active, dtype=bool)
        if (self.done & active).any():
            raise EnvContractError("step() on finished episodes; call reset() first")
        push = np.clip(np.asarray(actions, dtype=float).reshape(self.num_envs), -3.0, 3.0)
        self.velocity = np.where(active, self.velocity + self.policy_dt * self.action_scale * push, self.velocity)
        self.step_count[active] += 1

        error = (self.velocity - TOY_TARGET_VELOCITY) ** 2
        reward = RewardBreakdown.from_terms(
            {"velocity_error": np.where(active, error, 0.0)}, {"velocity_error": -1.0}
        )
        done = active & (self.step_count >= self.episode_steps)
        self.done |= done
        info = {"time": self.step_count * self.policy_dt}
        return self._observe(), reward, done, info
