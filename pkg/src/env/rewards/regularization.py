"""Joint and action regularization penalties."""

import numpy as np

from src.env.rewards.base import RewardContext, RewardTerm


class JointLimitViolation(RewardTerm):
    """Number of actuated joints outside their limits."""

    @property
    def name(self) -> str:
        return "joint_limit"

    def compute(self, ctx: RewardContext) -> np.ndarray:
        lower = ctx.joint_limits[:, 0]
        upper = ctx.joint_limits[:, 1]
        outside = (ctx.joint_q < lower) | (ctx.joint_q > upper)
        return outside.sum(axis=-1).astype(float)


class JointTorque(RewardTerm):
    @property
    def name(self) -> str:
        return "torques"

    def compute(self, ctx: RewardContext) -> np.ndarray:
        return np.sum(ctx.torques**2, axis=-1)


class JointVelocity(RewardTerm):
    @property
    def name(self) -> str:
        return "joint_vel"

    def compute(self, ctx: RewardContext) -> np.ndarray:
        return np.sum(ctx.joint_qd**2, axis=-1)


class JointAcceleration(RewardTerm):
    """Finite-difference joint acceleration over one control period."""

    @property
    def name(self) -> str:
        return "joint_acc"

    def compute(self, ctx: RewardContext) -> np.ndarray:
        acceleration = (ctx.joint_qd - ctx.prev_joint_qd) / ctx.policy_dt
        return np.sum(acceleration**2, axis=-1)


class ActionRate(RewardTerm):
    @property
    def name(self) -> str:
        return "action_rate"

    def compute(self, ctx: RewardContext) -> np.ndarray:
        return np.sum((ctx.actions - ctx.prev_actions) ** 2, axis=-1)


class ActionSmoothness(RewardTerm):
    @property
    def name(self) -> str:
        return "action_smoothness"

    def compute(self, ctx: RewardContext) -> np.ndarray:
        second = ctx.actions - 2.0 * ctx.prev_actions + ctx.prev_prev_actions
        return np.sum(second**2, axis=-1)
