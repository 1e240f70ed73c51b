"""Posture and foot-placement tracking penalties."""

import numpy as np

from src.env.rewards.base import RewardContext, RewardTerm


class BodyHeight(RewardTerm):
    @property
    def name(self) -> str:
        return "body_height"

    def compute(self, ctx: RewardContext) -> np.ndarray:
        return (ctx.base_height - ctx.cmd.h_z_cmd) ** 2


class Orientation(RewardTerm):
    """Pitch error squared; roll is zero in the plane."""

    @property
    def name(self) -> str:
        return "orientation"

    def compute(self, ctx: RewardContext) -> np.ndarray:
        return (ctx.pitch - ctx.cmd.pitch_cmd) ** 2


class RaibertPlacement(RewardTerm):
    """Squared x distance of stance feet from the Raibert target, weighted by C."""

    @property
    def name(self) -> str:
        return "raibert"

    def compute(self, ctx: RewardContext) -> np.ndarray:
        error = (ctx.foot_positions[..., 0] - ctx.raibert_targets) ** 2
        return np.sum(ctx.schedule * error, axis=-1)


class SwingHeight(RewardTerm):
    """Squared error to the swing apex height, weighted by the swing share 1 - C."""

    @property
    def name(self) -> str:
        return "swing_height"

    def compute(self, ctx: RewardContext) -> np.ndarray:
        error = (ctx.foot_positions[..., 1] - ctx.cmd.swing_height_cmd) ** 2
        return np.sum((1.0 - ctx.schedule) * error, axis=-1)


class VerticalVelocity(RewardTerm):
    @property
    def name(self) -> str:
        return "lin_vel_z"

    def compute(self, ctx: RewardContext) -> np.ndarray:
        return ctx.base_velocity[:, 1] ** 2


class BodyAngularVelocity(RewardTerm):
    """Pitch rate squared; roll rate is zero in the plane."""

    @property
    def name(self) -> str:
        return "ang_vel_xy"

    def compute(self, ctx: RewardContext) -> np.ndarray:
        return ctx.pitch_rate**2
