"""Base classes for reward terms."""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from src.env.gait import raibert_foot_target
from src.physics.contact import ContactState
from src.physics.robot import RobotModel, RobotState, forward_kinematics
from src.schemas import CommandState, RewardSigmas

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RewardContext:
    """Everything a reward term may read for one control step, batched on axis 0.

    Foot arrays are ordered (front, rear). Planar signals stand in for the 3D ones:
    lateral velocity, roll and yaw are identically zero.
    """

    base_velocity: np.ndarray
    base_height: np.ndarray
    pitch: np.ndarray
    pitch_rate: np.ndarray
    joint_q: np.ndarray
    joint_qd: np.ndarray
    prev_joint_qd: np.ndarray
    joint_limits: np.ndarray
    torques: np.ndarray
    actions: np.ndarray
    prev_actions: np.ndarray
    prev_prev_actions: np.ndarray
    contact: ContactState
    foot_positions: np.ndarray
    segments: Dict[str, np.ndarray]
    schedule: np.ndarray
    v_x_cmd: np.ndarray
    raibert_targets: np.ndarray
    cmd: CommandState
    policy_dt: float

    @classmethod
    def from_states(
        cls,
        state: RobotState,
        prev_state: RobotState,
        model: RobotModel,
        cmd: CommandState,
        v_x_cmd: np.ndarray,
        actions: np.ndarray,
        prev_actions: np.ndarray,
        prev_prev_actions: np.ndarray,
        torques: np.ndarray,
        schedule: np.ndarray,
        policy_dt: float,
        torso_length: Optional[float] = None,
    ) -> "RewardContext":
        """Assemble the context from the states bracketing one control step."""
        kinematics = forward_kinematics(model, state)
        half = 0.5 * (model.torso_length if torso_length is None else torso_length)
        axis = np.stack([np.cos(state.pitch), np.sin(state.pitch)], axis=-1)
        base = state.q[:, 0:2]
        hips = kinematics.hip_position
        knees = kinematics.knee_position
        feet = kinematics.foot_position
        segments = {
            "torso": np.stack([base - half * axis, base + half * axis], axis=1),
            "thigh_front": np.stack([hips[:, 0], knees[:, 0]], axis=1),
            "shank_front": np.stack([knees[:, 0], feet[:, 0]], axis=1),
            "thigh_rear": np.stack([hips[:, 1], knees[:, 1]], axis=1),
            "shank_rear": np.stack([knees[:, 1], feet[:, 1]], axis=1),
        }
        raibert = raibert_foot_target(hips[..., 0], state.qd[:, 0:1], cmd, v_x_cmd=v_x_cmd[:, None])
        return cls(
            base_velocity=state.qd[:, 0:2],
            base_height=state.base_z,
            pitch=state.pitch,
            pitch_rate=state.qd[:, 2],
            joint_q=state.joint_q,
            joint_qd=state.joint_qd,
            prev_joint_qd=prev_state.joint_qd,
            joint_limits=model.joint_limits,
            torques=torques,
            actions=actions,
            prev_actions=prev_actions,
            prev_prev_actions=prev_prev_actions,
            contact=state.contact,
            foot_positions=feet,
            segments=segments,
            schedule=schedule,
            v_x_cmd=v_x_cmd,
            raibert_targets=raibert,
            cmd=cmd,
            policy_dt=policy_dt,
        )


class RewardTerm(ABC):
    """Base class for all reward terms.

    Task terms return a tracking value in (0, 1]; auxiliary terms return a
    non-negative magnitude that the weight turns into a penalty.
    """

    def __init__(self, sigmas: Optional[RewardSigmas] = None):
        """Initialize the term.

        Args:
            sigmas: Kernel widths for exponential terms
        """
        self.sigmas = sigmas or RewardSigmas()

    @property
    @abstractmethod
    def name(self) -> str:
        """Return the reward term identifier."""

    @abstractmethod
    def compute(self, ctx: RewardContext) -> np.ndarray:
        """Evaluate the unweighted term.

        Args:
            ctx: Inputs of the control step

        Returns:
            One value per environment
        """

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name})"


@dataclass(frozen=True)
class RewardBreakdown:
    """Unweighted value of every term, the weights used and the weighted total."""

    terms: Dict[str, np.ndarray]
    weights: Dict[str, float]
    total: np.ndarray

    @classmethod
    def from_terms(cls, terms: Dict[str, np.ndarray], weights: Dict[str, float]) -> "RewardBreakdown":
        total = np.zeros_like(next(iter(terms.values())), dtype=float)
        for name, value in terms.items():
            total = total + weights[name] * value
        return cls(terms=terms, weights=dict(weights), total=total)

    def weighted(self) -> Dict[str, np.ndarray]:
        return {name: self.weights[name] * value for name, value in self.terms.items()}

    def is_finite(self) -> np.ndarray:
        """Per-environment flag, False where any term is non-finite."""
        finite = np.isfinite(self.total)
        for value in self.terms.values():
            finite &= np.isfinite(value)
        return finite
