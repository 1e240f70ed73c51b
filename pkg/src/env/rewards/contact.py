"""Contact-shaping and foot-contact penalties."""

import itertools

import numpy as np

from src.env.rewards.base import RewardContext, RewardTerm

# Segment pairs that may touch; a thigh and the torso always meet at the hip.
COLLISION_PAIRS = tuple(
    itertools.product(("thigh_front", "shank_front"), ("thigh_rear", "shank_rear"))
) + (("shank_front", "torso"), ("shank_rear", "torso"))


def segments_intersect(first: np.ndarray, second: np.ndarray) -> np.ndarray:
    """Proper intersection of planar segments, each (N, 2 endpoints, 2)."""

    def orientation(a, b, c):
        return (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])

    p, q = first[:, 0], first[:, 1]
    r, s = second[:, 0], second[:, 1]
    d1 = orientation(p, q, r)
    d2 = orientation(p, q, s)
    d3 = orientation(r, s, p)
    d4 = orientation(r, s, q)
    return (d1 * d2 < 0.0) & (d3 * d4 < 0.0)


class SwingForce(RewardTerm):
    """Ground force on feet commanded to swing: sum (1 - C) (1 - exp(-|F|^2 / sigma))."""

    @property
    def name(self) -> str:
        return "swing_force"

    def compute(self, ctx: RewardContext) -> np.ndarray:
        force_sq = ctx.contact.normal_force**2 + ctx.contact.tangential_force**2
        swing = 1.0 - ctx.schedule
        return np.sum(swing * (1.0 - np.exp(-force_sq / self.sigmas.contact_force)), axis=-1)


class StanceSlip(RewardTerm):
    """Foot speed on feet commanded to stand: sum C (1 - exp(-|v_foot|^2 / sigma))."""

    @property
    def name(self) -> str:
        return "stance_slip"

    def compute(self, ctx: RewardContext) -> np.ndarray:
        speed_sq = ctx.contact.foot_velocity[..., 0] ** 2
        return np.sum(
            ctx.schedule * (1.0 - np.exp(-speed_sq / self.sigmas.contact_velocity)), axis=-1
        )


class FootSlip(RewardTerm):
    """Horizontal foot speed squared over feet actually in contact."""

    @property
    def name(self) -> str:
        return "foot_slip"

    def compute(self, ctx: RewardContext) -> np.ndarray:
        speed_sq = ctx.contact.foot_velocity[..., 0] ** 2
        return np.sum(ctx.contact.in_contact * speed_sq, axis=-1)


class LegCollision(RewardTerm):
    """1 when any leg segment crosses the other leg or the torso."""

    @property
    def name(self) -> str:
        return "collision"

    def compute(self, ctx: RewardContext) -> np.ndarray:
        hit = np.zeros(ctx.pitch.shape, dtype=bool)
        for first, second in COLLISION_PAIRS:
            hit |= segments_intersect(ctx.segments[first], ctx.segments[second])
        return hit.astype(float)
