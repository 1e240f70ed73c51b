"""Proximal policy optimization: rollout storage, GAE, Adam and the clipped update."""

import logging
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

import numpy as np

from src.exceptions import NonFiniteLoss
from src.learner.network import PolicyNetwork, Upstream, backward, forward
from src.schemas import PpoConfig

logger = logging.getLogger(__name__)

LOG_2PI = float(np.log(2.0 * np.pi))
LOG_RATIO_CLAMP = 20.0
ADVANTAGE_EPS = 1e-8


def gaussian_log_prob(actions: np.ndarray, mean: np.ndarray, log_std: np.ndarray) -> np.ndarray:
    """Log density of a diagonal Gaussian, summed over the action axis."""
    z = (actions - mean) / np.exp(log_std)
    return -0.5 * np.sum(z**2, axis=-1) - np.sum(log_std) - 0.5 * mean.shape[-1] * LOG_2PI


def gaussian_entropy(log_std: np.ndarray) -> float:
    return float(np.sum(log_std + 0.5 * (LOG_2PI + 1.0)))


def sample_action(
    network: PolicyNetwork, observation: np.ndarray, rng: np.random.Generator
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Sample actions from the policy.

    Returns:
        (actions, log_probs, values)
    """
    out = forward(network, observation)
    actions = out.mean + np.exp(out.log_std) * rng.standard_normal(out.mean.shape)
    return actions, gaussian_log_prob(actions, out.mean, out.log_std), out.value


def mean_action(network: PolicyNetwork, observation: np.ndarray) -> np.ndarray:
    """Deterministic action used for evaluation."""
    return forward(network, observation).mean


class RolloutBuffer:
    """Fixed-size (time, env) storage for one PPO iteration."""

    def __init__(self, num_steps: int, num_envs: int, obs_dim: int, action_dim: int):
        self.num_steps = num_steps
        self.num_envs = num_envs
        self.observations = np.zeros((num_steps, num_envs, obs_dim))
        self.actions = np.zeros((num_steps, num_envs, action_dim))
        self.log_probs = np.zeros((num_steps, num_envs))
        self.values = np.zeros((num_steps, num_envs))
        self.rewards = np.zeros((num_steps, num_envs))
        self.dones = np.zeros((num_steps, num_envs))
        self.bootstrap_value = np.zeros(num_envs)
        self.ptr = 0

    @property
    def full(self) -> bool:
        return self.ptr == self.num_steps

    def add(
        self,
        observation: np.ndarray,
        actions: np.ndarray,
        log_probs: np.ndarray,
        values: np.ndarray,
        rewards: np.ndarray,
        dones: np.ndarray,
    ) -> None:
        """Append one time step for every environment.

        Raises:
            ValueError: The buffer is full or any value is non-finite
        """
        if self.full:
            raise ValueError(f"rollout buffer is full ({self.num_steps} steps)")
        for name, value in (
            ("observation", observation),
            ("actions", actions),
            ("log_probs", log_probs),
            ("values", values),
            ("rewards", rewards),
        ):
            if not np.all(np.isfinite(value)):
                raise ValueError(f"non-finite {name} at rollout step {self.ptr}")
        t = self.ptr
        self.observations[t] = observation
        self.actions[t] = actions
        self.log_probs[t] = log_probs
        self.values[t] = values
        self.rewards[t] = rewards
        self.dones[t] = dones
        self.ptr += 1

    def set_bootstrap(self, values: np.ndarray) -> None:
        if not np.all(np.isfinite(values)):
            raise ValueError("non-finite bootstrap value")
        self.bootstrap_value = np.asarray(values, dtype=float).copy()

    def clear(self) -> None:
        self.ptr = 0


def gae(
    rewards: np.ndarray,
    values: np.ndarray,
    dones: np.ndarray,
    bootstrap_value: np.ndarray,
    gamma: float,
    lam: float,
) -> Tuple[np.ndarray, np.ndarray]:
    """Generalized advantage estimation over a (time, env) rollout.

    A done flag at step t cuts both the bootstrap and the recursion after t.

    Returns:
        (advantages, returns), unnormalized, with returns = advantages + values
    """
    rewards = np.asarray(rewards, dtype=float)
    values = np.asarray(values, dtype=float)
    nonterminal = 1.0 - np.asarray(dones, dtype=float)
    advantages = np.zeros_like(rewards)
    running = np.zeros_like(rewards[0])
    for t in reversed(range(rewards.shape[0])):
        next_value = bootstrap_value if t == rewards.shape[0] - 1 else values[t + 1]
        delta = rewards[t] + gamma * nonterminal[t] * next_value - values[t]
        running = delta + gamma * lam * nonterminal[t] * running
        advantages[t] = running
    return advantages, advantages + values


class Adam:
    """Adam over a flat parameter vector."""

    def __init__(self, size: int, lr: float, betas=(0.9, 0.999), eps: float = 1e-8):
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.m = np.zeros(size)
        self.v = np.zeros(size)
        self.t = 0

    @classmethod
    def from_config(cls, size: int, config: PpoConfig) -> "Adam":
        return cls(size, config.learning_rate, tuple(config.adam_betas), config.adam_eps)

    def step(self, params: np.ndarray, grad: np.ndarray) -> np.ndarray:
        self.t += 1
        self.m = self.beta1 * self.m + (1.0 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1.0 - self.beta2) * grad**2
        m_hat = self.m / (1.0 - self.beta1**self.t)
        v_hat = self.v / (1.0 - self.beta2**self.t)
        return params - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


@dataclass
class MinibatchLoss:
    loss: float
    policy_loss: float
    value_loss: float
    entropy: float
    clip_fraction: float
    approx_kl: float
    grad: np.ndarray


def minibatch_loss(
    network: PolicyNetwork,
    observations: np.ndarray,
    actions: np.ndarray,
    old_log_probs: np.ndarray,
    advantages: np.ndarray,
    returns: np.ndarray,
    config: PpoConfig,
) -> MinibatchLoss:
    """Clipped surrogate, value and entropy losses with their exact gradient."""
    out, cache = forward(network, observations, return_cache=True)
    batch = observations.shape[0]
    std = np.exp(out.log_std)
    z = (actions - out.mean) / std
    log_probs = -0.5 * np.sum(z**2, axis=-1) - np.sum(out.log_std) - 0.5 * actions.shape[-1] * LOG_2PI

    log_ratio = log_probs - old_log_probs
    clamped = np.clip(log_ratio, -LOG_RATIO_CLAMP, LOG_RATIO_CLAMP)
    ratio = np.exp(clamped)
    clipped_ratio = np.clip(ratio, 1.0 - config.clip, 1.0 + config.clip)
    unclipped = ratio * advantages
    surrogate = np.minimum(unclipped, clipped_ratio * advantages)

    policy_loss = -float(np.mean(surrogate))
    value_error = out.value - returns
    value_loss = 0.5 * float(np.mean(value_error**2))
    entropy = gaussian_entropy(out.log_std)
    loss = policy_loss + config.value_coef * value_loss - config.entropy_coef * entropy

    # The min follows the unclipped branch or a constant; the clamp blocks the gradient too
    passes = (unclipped <= clipped_ratio * advantages) & (np.abs(log_ratio) < LOG_RATIO_CLAMP)
    d_log_prob = -np.where(passes, advantages * ratio, 0.0) / batch
    d_mean = d_log_prob[:, None] * z / std
    d_log_std = np.sum(d_log_prob[:, None] * (z**2 - 1.0), axis=0) - config.entropy_coef
    d_value = config.value_coef * value_error / batch

    grad = backward(network, observations, Upstream(d_mean, d_log_std, d_value), cache=cache)
    return MinibatchLoss(
        loss=float(loss),
        policy_loss=policy_loss,
        value_loss=value_loss,
        entropy=entropy,
        clip_fraction=float(np.mean(np.abs(ratio - 1.0) > config.clip)),
        approx_kl=float(np.mean((ratio - 1.0) - clamped)),
        grad=grad,
    )


def clip_grad_norm(grad: np.ndarray, max_norm: float) -> Tuple[np.ndarray, float]:
    norm = float(np.linalg.norm(grad))
    if norm > max_norm:
        grad = grad * (max_norm / (norm + 1e-12))
    return grad, norm


def _dump_minibatch(dump_dir: Path, tag: str, **arrays) -> Path:
    dump_dir.mkdir(parents=True, exist_ok=True)
    path = dump_dir / f"nonfinite_minibatch_{tag}.npz"
    np.savez(path, **arrays)
    return path


@dataclass
class UpdateResult:
    params: np.ndarray
    stats: Dict[str, float]


def ppo_update(
    network: PolicyNetwork,
    buffer: RolloutBuffer,
    config: PpoConfig,
    optimizer: Adam,
    rng: np.random.Generator,
    dump_dir: Optional[Union[str, Path]] = None,
) -> UpdateResult:
    """Run the clipped PPO update over a full rollout.

    The network passed in is not modified; the caller adopts ``result.params``.

    Args:
        network: Policy that collected the rollout
        buffer: Completed rollout with its bootstrap value
        config: PPO hyperparameters
        optimizer: Adam state, advanced in place
        rng: Generator for minibatch shuffling
        dump_dir: Where an offending minibatch is written on a non-finite loss

    Returns:
        UpdateResult with the new parameters and mean statistics

    Raises:
        NonFiniteLoss: Loss or gradient became non-finite
    """
    advantages, returns = gae(
        buffer.rewards[: buffer.ptr],
        buffer.values[: buffer.ptr],
        buffer.dones[: buffer.ptr],
        buffer.bootstrap_value,
        config.gamma,
        config.gae_lambda,
    )
    advantages = advantages.reshape(-1)
    advantages = (advantages - advantages.mean()) / (advantages.std() + ADVANTAGE_EPS)
    returns = returns.reshape(-1)
    observations = buffer.observations[: buffer.ptr].reshape(-1, buffer.observations.shape[-1])
    actions = buffer.actions[: buffer.ptr].reshape(-1, buffer.actions.shape[-1])
    old_log_probs = buffer.log_probs[: buffer.ptr].reshape(-1)

    working = network.copy()
    dump_dir = Path(dump_dir) if dump_dir is not None else Path(tempfile.gettempdir())
    history: Dict[str, list] = {
        "policy_loss": [],
        "value_loss": [],
        "entropy": [],
        "clip_fraction": [],
        "approx_kl": [],
        "grad_norm": [],
    }

    for epoch in range(config.epochs):
        order = rng.permutation(observations.shape[0])
        for k, index in enumerate(np.array_split(order, config.minibatches)):
            if index.size == 0:
                continue
            result = minibatch_loss(
                working,
                observations[index],
                actions[index],
                old_log_probs[index],
                advantages[index],
                returns[index],
                config,
            )
            if not np.isfinite(result.loss) or not np.all(np.isfinite(result.grad)):
                path = _dump_minibatch(
                    dump_dir,
                    f"e{epoch}_m{k}",
                    observations=observations[index],
                    actions=actions[index],
                    old_log_probs=old_log_probs[index],
                    advantages=advantages[index],
                    returns=returns[index],
                    params=working.params,
                )
                logger.error(f"Non-finite PPO loss at epoch {epoch}, minibatch {k}")
                raise NonFiniteLoss(str(path))

            grad, norm = clip_grad_norm(result.grad, config.max_grad_norm)
            working.params = optimizer.step(working.params, grad)
            working.clamp_log_std()

            for name in ("policy_loss", "value_loss", "entropy", "clip_fraction", "approx_kl"):
                history[name].append(getattr(result, name))
            history["grad_norm"].append(norm)

    stats = {name: float(np.mean(values)) if values else 0.0 for name, values in history.items()}
    logger.debug(
        f"PPO update: policy_loss={stats['policy_loss']:.4f} value_loss={stats['value_loss']:.4f} "
        f"kl={stats['approx_kl']:.5f}"
    )
    return UpdateResult(params=working.params, stats=stats)
