"""Policy action to joint torque: target mapping and the PD tracking law."""

import dataclasses
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from src.schemas import ActuationConfig

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class PdGains:
    """Nominal gains with optional randomized scales.

    Scales broadcast against (num_envs, 4) joint arrays, so per-environment values are
    passed as (num_envs, 1) and per-joint offsets as (num_envs, 4).
    """

    kp: float = 80.0
    kd: float = 2.5
    kp_scale: ArrayLike = 1.0
    kd_scale: ArrayLike = 1.0
    motor_strength_scale: ArrayLike = 1.0
    motor_offset: ArrayLike = 0.0

    @classmethod
    def from_config(cls, config: ActuationConfig) -> "PdGains":
        return cls(kp=config.kp, kd=config.kd)

    def randomized(
        self,
        kp_scale: ArrayLike,
        kd_scale: ArrayLike,
        motor_strength_scale: ArrayLike,
        motor_offset: ArrayLike,
    ) -> "PdGains":
        return dataclasses.replace(
            self,
            kp_scale=kp_scale,
            kd_scale=kd_scale,
            motor_strength_scale=motor_strength_scale,
            motor_offset=motor_offset,
        )


@dataclass(frozen=True)
class ActionCommand:
    """Clipped policy output and the joint targets it maps to."""

    raw_action: np.ndarray
    target_q: np.ndarray


def action_to_target(
    raw_action: np.ndarray,
    default_pose: np.ndarray,
    action_scale: float,
    clip: float = 3.0,
    motor_offset: ArrayLike = 0.0,
    joint_limits: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Joint targets about the default pose.

    Args:
        raw_action: Policy output per actuated joint
        default_pose: Nominal joint angles in rad
        action_scale: rad per unit action
        clip: Symmetric bound applied to the raw action
        motor_offset: Encoder offset added to the target
        joint_limits: (4, 2) lower/upper bounds; targets are clamped into them

    Returns:
        target_q in rad
    """
    action = np.clip(np.asarray(raw_action, dtype=float), -clip, clip)
    target = default_pose + action_scale * action + motor_offset
    if joint_limits is not None:
        target = np.clip(target, joint_limits[:, 0], joint_limits[:, 1])
    return target


def pd_torque(
    target_q: np.ndarray,
    q: np.ndarray,
    qd: np.ndarray,
    gains: PdGains,
    torque_limit: float,
) -> np.ndarray:
    """tau = clamp(kp' (target - q) - kd' qd) * strength, re-clamped to the limit."""
    kp = gains.kp * gains.kp_scale
    kd = gains.kd * gains.kd_scale
    torque = np.clip(kp * (target_q - q) - kd * qd, -torque_limit, torque_limit)
    return np.clip(torque * gains.motor_strength_scale, -torque_limit, torque_limit)
