"""Actor-critic MLP with a flat parameter vector and hand-written reverse mode.

The actor and critic are separate tanh trunks. The actor ends in a linear mean head
and a state-independent log standard deviation; the critic ends in a scalar value.
All parameters live in one float64 vector addressed through a name -> (slice, shape)
layout, so the optimizer and the checkpoint format see a single array.
"""

import hashlib
import json
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.env.observation import OBS_LAYOUT_VERSION
from src.schemas import PpoConfig

NETWORK_FORMAT_VERSION = 1


@dataclass(frozen=True)
class NetworkSpec:
    """Architecture; two networks with equal specs share a parameter layout."""

    obs_dim: int
    action_dim: int
    hidden_sizes: Tuple[int, ...] = (256, 128)
    init_log_std: float = -1.0
    log_std_bounds: Tuple[float, float] = (-4.0, 1.0)
    dtype: str = "float64"

    @classmethod
    def from_config(cls, obs_dim: int, action_dim: int, config: PpoConfig) -> "NetworkSpec":
        return cls(
            obs_dim=obs_dim,
            action_dim=action_dim,
            hidden_sizes=tuple(config.hidden_sizes),
            init_log_std=config.init_log_std,
            log_std_bounds=tuple(config.log_std_bounds),
            dtype=config.dtype,
        )

    def as_dict(self) -> Dict:
        return {
            "obs_dim": self.obs_dim,
            "action_dim": self.action_dim,
            "hidden_sizes": list(self.hidden_sizes),
            "init_log_std": self.init_log_std,
            "log_std_bounds": list(self.log_std_bounds),
            "dtype": self.dtype,
            "activation": "tanh",
            "obs_layout_version": OBS_LAYOUT_VERSION,
            "format_version": NETWORK_FORMAT_VERSION,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "NetworkSpec":
        data = json.loads(text)
        return cls(
            obs_dim=data["obs_dim"],
            action_dim=data["action_dim"],
            hidden_sizes=tuple(data["hidden_sizes"]),
            init_log_std=data["init_log_std"],
            log_std_bounds=tuple(data["log_std_bounds"]),
            dtype=data["dtype"],
        )

    def digest(self) -> bytes:
        """SHA-256 of the architecture, including the observation layout version."""
        return hashlib.sha256(self.to_json().encode("utf-8")).digest()


def _trunk_shapes(prefix: str, sizes: List[int]) -> List[Tuple[str, Tuple[int, ...]]]:
    shapes = []
    for index, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
        shapes.append((f"{prefix}.hidden{index}.weight", (fan_in, fan_out)))
        shapes.append((f"{prefix}.hidden{index}.bias", (fan_out,)))
    return shapes


def build_layout(spec: NetworkSpec) -> "OrderedDict[str, Tuple[slice, Tuple[int, ...]]]":
    """Name -> (slice into the flat vector, shape), in a fixed order."""
    sizes = [spec.obs_dim, *spec.hidden_sizes]
    last = sizes[-1]
    shapes = _trunk_shapes("actor", sizes)
    shapes += [
        ("actor.mean.weight", (last, spec.action_dim)),
        ("actor.mean.bias", (spec.action_dim,)),
        ("log_std", (spec.action_dim,)),
    ]
    shapes += _trunk_shapes("critic", sizes)
    shapes += [("critic.value.weight", (last, 1)), ("critic.value.bias", (1,))]

    layout: "OrderedDict[str, Tuple[slice, Tuple[int, ...]]]" = OrderedDict()
    offset = 0
    for name, shape in shapes:
        size = int(np.prod(shape))
        layout[name] = (slice(offset, offset + size), shape)
        offset += size
    return layout


class PolicyNetwork:
    """Gaussian actor plus value critic over a flat parameter vector."""

    def __init__(self, spec: NetworkSpec, params: Optional[np.ndarray] = None, seed: int = 0):
        """Initialize the network.

        Args:
            spec: Architecture
            params: Flat parameters to adopt; freshly initialized when None
            seed: Initialization seed
        """
        self.spec = spec
        self.layout = build_layout(spec)
        self.param_count = next(reversed(self.layout.values()))[0].stop
        if params is None:
            self.params = self._initial_params(seed)
        else:
            params = np.asarray(params, dtype=np.float64)
            if params.shape != (self.param_count,):
                raise ValueError(f"expected {self.param_count} parameters, got {params.shape}")
            self.params = params.copy()

    def _initial_params(self, seed: int) -> np.ndarray:
        rng = np.random.default_rng(seed)
        params = np.zeros(self.param_count)
        for name, (index, shape) in self.layout.items():
            if name.endswith(".weight"):
                gain = 1.0
                if name == "actor.mean.weight":
                    gain = 0.01
                params[index] = (gain * rng.standard_normal(shape) / np.sqrt(shape[0])).ravel()
        params[self.layout["log_std"][0]] = self.spec.init_log_std
        return params

    def view(self, name: str) -> np.ndarray:
        """Writable view of one named parameter block."""
        index, shape = self.layout[name]
        return self.params[index].reshape(shape)

    def with_params(self, params: np.ndarray) -> "PolicyNetwork":
        return PolicyNetwork(self.spec, params=params)

    def copy(self) -> "PolicyNetwork":
        return self.with_params(self.params)

    def clamp_log_std(self) -> None:
        low, high = self.spec.log_std_bounds
        index = self.layout["log_std"][0]
        self.params[index] = np.clip(self.params[index], low, high)

    def trunk_depth(self) -> int:
        return len(self.spec.hidden_sizes)


@dataclass
class NetworkOutput:
    mean: np.ndarray
    log_std: np.ndarray
    value: np.ndarray


@dataclass
class ForwardCache:
    """Activations needed by :func:`backward`."""

    actor: List[np.ndarray] = field(default_factory=list)
    critic: List[np.ndarray] = field(default_factory=list)
    log_std_raw: Optional[np.ndarray] = None


@dataclass
class Upstream:
    """Gradient of the scalar loss with respect to each network output."""

    mean: np.ndarray
    log_std: np.ndarray
    value: np.ndarray


def _trunk_forward(network: PolicyNetwork, prefix: str, x: np.ndarray, dtype) -> List[np.ndarray]:
    activations = [x]
    for index in range(network.trunk_depth()):
        weight = network.view(f"{prefix}.hidden{index}.weight").astype(dtype, copy=False)
        bias = network.view(f"{prefix}.hidden{index}.bias").astype(dtype, copy=False)
        activations.append(np.tanh(activations[-1] @ weight + bias))
    return activations


def forward(network: PolicyNetwork, observation: np.ndarray, return_cache: bool = False):
    """Evaluate the actor mean, log-std and critic value.

    Args:
        network: Policy network
        observation: (batch, obs_dim) or (obs_dim,)
        return_cache: Also return the activations for :func:`backward`

    Returns:
        NetworkOutput, or (NetworkOutput, ForwardCache) when ``return_cache``
    """
    dtype = np.dtype(network.spec.dtype)
    x = np.atleast_2d(np.asarray(observation)).astype(dtype, copy=False)
    actor = _trunk_forward(network, "actor", x, dtype)
    critic = _trunk_forward(network, "critic", x, dtype)

    mean = actor[-1] @ network.view("actor.mean.weight").astype(dtype) + network.view("actor.mean.bias")
    value = critic[-1] @ network.view("critic.value.weight").astype(dtype) + network.view(
        "critic.value.bias"
    )
    raw_log_std = network.view("log_std").copy()
    log_std = np.clip(raw_log_std, *network.spec.log_std_bounds)

    output = NetworkOutput(
        mean=mean.astype(np.float64), log_std=log_std, value=value[:, 0].astype(np.float64)
    )
    if return_cache:
        return output, ForwardCache(actor=actor, critic=critic, log_std_raw=raw_log_std)
    return output


def _trunk_backward(
    network: PolicyNetwork,
    prefix: str,
    activations: List[np.ndarray],
    upstream: np.ndarray,
    grad: np.ndarray,
) -> None:
    for index in reversed(range(network.trunk_depth())):
        out = activations[index + 1]
        dz = upstream * (1.0 - out**2)
        grad[network.layout[f"{prefix}.hidden{index}.weight"][0]] = (activations[index].T @ dz).ravel()
        grad[network.layout[f"{prefix}.hidden{index}.bias"][0]] = dz.sum(axis=0)
        upstream = dz @ network.view(f"{prefix}.hidden{index}.weight").T


def backward(
    network: PolicyNetwork,
    observation: np.ndarray,
    upstream: Upstream,
    cache: Optional[ForwardCache] = None,
) -> np.ndarray:
    """Exact gradient of the loss with respect to every parameter.

    Args:
        network: Policy network
        observation: Inputs of the matching forward pass
        upstream: dLoss/d(mean, log_std, value)
        cache: Activations from ``forward(..., return_cache=True)``; recomputed when None

    Returns:
        Flat gradient aligned with ``network.params``
    """
    if cache is None:
        _, cache = forward(network, observation, return_cache=True)
    grad = np.zeros(network.param_count)
    d_mean = np.atleast_2d(np.asarray(upstream.mean, dtype=np.float64))
    d_value = np.asarray(upstream.value, dtype=np.float64).reshape(-1, 1)

    actor_top = cache.actor[-1].astype(np.float64)
    grad[network.layout["actor.mean.weight"][0]] = (actor_top.T @ d_mean).ravel()
    grad[network.layout["actor.mean.bias"][0]] = d_mean.sum(axis=0)
    _trunk_backward(network, "actor", cache.actor, d_mean @ network.view("actor.mean.weight").T, grad)

    low, high = network.spec.log_std_bounds
    inside = (cache.log_std_raw >= low) & (cache.log_std_raw <= high)
    grad[network.layout["log_std"][0]] = np.asarray(upstream.log_std, dtype=np.float64) * inside

    critic_top = cache.critic[-1].astype(np.float64)
    grad[network.layout["critic.value.weight"][0]] = (critic_top.T @ d_value).ravel()
    grad[network.layout["critic.value.bias"][0]] = d_value.sum(axis=0)
    _trunk_backward(
        network, "critic", cache.critic, d_value @ network.view("critic.value.weight").T, grad
    )
    return grad
