"""Task rewards: commanded velocity tracking."""

import numpy as np

from src.env.rewards.base import RewardContext, RewardTerm


class LinearVelocityTracking(RewardTerm):
    """exp(-|v_xy - v_xy_cmd|^2 / sigma); lateral velocity and command are zero."""

    @property
    def name(self) -> str:
        return "tracking_lin_vel"

    def compute(self, ctx: RewardContext) -> np.ndarray:
        error = (ctx.base_velocity[:, 0] - ctx.v_x_cmd) ** 2
        return np.exp(-error / self.sigmas.lin_vel)


class YawRateTracking(RewardTerm):
    """exp(-(omega_z - omega_z_cmd)^2 / sigma); yaw rate is identically zero in the plane."""

    @property
    def name(self) -> str:
        return "tracking_ang_vel"

    def compute(self, ctx: RewardContext) -> np.ndarray:
        yaw_rate = np.zeros_like(ctx.pitch)
        return np.exp(-((yaw_rate - ctx.cmd.omega_z_cmd) ** 2) / self.sigmas.ang_vel)
