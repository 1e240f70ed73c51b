"""Reward terms for the locomotion task."""

import logging
from typing import Dict, List, Optional

from src.env.rewards.base import RewardBreakdown, RewardContext, RewardTerm
from src.env.rewards.contact import FootSlip, LegCollision, StanceSlip, SwingForce
from src.env.rewards.posture import (
    BodyAngularVelocity,
    BodyHeight,
    Orientation,
    RaibertPlacement,
    SwingHeight,
    VerticalVelocity,
)
from src.env.rewards.regularization import (
    ActionRate,
    ActionSmoothness,
    JointAcceleration,
    JointLimitViolation,
    JointTorque,
    JointVelocity,
)
from src.env.rewards.tracking import LinearVelocityTracking, YawRateTracking
from src.schemas import RewardSigmas, RewardWeights

logger = logging.getLogger(__name__)

# Reward registry, in table order: two task rows then sixteen auxiliary rows
REWARD_TERMS = {
    'tracking_lin_vel': LinearVelocityTracking,
    'tracking_ang_vel': YawRateTracking,
    'swing_force': SwingForce,
    'stance_slip': StanceSlip,
    'body_height': BodyHeight,
    'orientation': Orientation,
    'raibert': RaibertPlacement,
    'swing_height': SwingHeight,
    'lin_vel_z': VerticalVelocity,
    'ang_vel_xy': BodyAngularVelocity,
    'foot_slip': FootSlip,
    'collision': LegCollision,
    'joint_limit': JointLimitViolation,
    'torques': JointTorque,
    'joint_vel': JointVelocity,
    'joint_acc': JointAcceleration,
    'action_rate': ActionRate,
    'action_smoothness': ActionSmoothness,
}


def create_reward_term(name: str, sigmas: Optional[RewardSigmas] = None) -> RewardTerm:
    """Factory function to create reward terms.

    Args:
        name: Registered term name
        sigmas: Kernel widths

    Returns:
        RewardTerm instance

    Raises:
        ValueError: If the term name is unknown
    """
    if name not in REWARD_TERMS:
        raise ValueError(
            f"Unknown reward term: {name}. "
            f"Available terms: {list(REWARD_TERMS.keys())}"
        )
    return REWARD_TERMS[name](sigmas)


def get_available_terms() -> List[str]:
    return list(REWARD_TERMS.keys())


def compute_reward(
    ctx: RewardContext,
    weights: Optional[RewardWeights] = None,
    sigmas: Optional[RewardSigmas] = None,
) -> RewardBreakdown:
    """Evaluate every registered term and the weighted total.

    Args:
        ctx: Inputs of one control step
        weights: Term weights; defaults reproduce the training table
        sigmas: Kernel widths

    Returns:
        RewardBreakdown with one entry per term
    """
    weights = weights or RewardWeights()
    weight_map: Dict[str, float] = weights.model_dump()
    terms = {name: create_reward_term(name, sigmas).compute(ctx) for name in REWARD_TERMS}
    return RewardBreakdown.from_terms(terms, weight_map)


__all__ = [
    'REWARD_TERMS',
    'RewardBreakdown',
    'RewardContext',
    'RewardTerm',
    'compute_reward',
    'create_reward_term',
    'get_available_terms',
]
