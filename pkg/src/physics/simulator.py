"""Time stepping of the planar quadruped with penalty contact and spring feet."""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from src.exceptions import NumericalDivergence
from src.physics.contact import contact_damping, ground_contact_force
from src.physics.robot import (
    ACTUATED,
    SLIDERS,
    RobotModel,
    RobotState,
    foot_jacobians,
    forward_kinematics,
    generalized_accelerations,
    link_frames,
    motion_subspaces,
    passive_slider_forces,
    total_mechanical_energy,
)
from src.schemas import PhysicsConfig

logger = logging.getLogger(__name__)

__all__ = [
    "WorldParams",
    "semi_implicit_euler",
    "refresh_contact",
    "step",
    "total_mechanical_energy",
]


@dataclass(frozen=True)
class WorldParams:
    """Per-environment ground and gravity parameters, each batched on axis 0."""

    friction: np.ndarray
    restitution: np.ndarray
    gravity: np.ndarray

    @classmethod
    def nominal(cls, cfg: PhysicsConfig, num_envs: int) -> "WorldParams":
        return cls(
            friction=np.full(num_envs, cfg.friction_coefficient),
            restitution=np.full(num_envs, cfg.restitution_surrogate),
            gravity=np.tile(np.asarray(cfg.gravity, dtype=float), (num_envs, 1)),
        )


def semi_implicit_euler(
    position: np.ndarray,
    velocity: np.ndarray,
    acceleration: np.ndarray,
    h: float,
) -> Tuple[np.ndarray, np.ndarray]:
    """Velocity first, then position with the updated velocity."""
    velocity = velocity + h * acceleration
    return position + h * velocity, velocity


def _out_of_bounds(q: np.ndarray, qd: np.ndarray, bound: float) -> np.ndarray:
    finite = np.isfinite(q).all(axis=1) & np.isfinite(qd).all(axis=1)
    with np.errstate(invalid="ignore"):
        large = (np.abs(q) > bound).any(axis=1) | (np.abs(qd) > bound).any(axis=1)
    return ~finite | large


def refresh_contact(
    state: RobotState,
    cfg: PhysicsConfig,
    model: RobotModel,
    world: Optional[WorldParams] = None,
) -> RobotState:
    """Recompute the contact state for the current positions and velocities."""
    world = world or WorldParams.nominal(cfg, state.num_envs)
    kinematics = forward_kinematics(model, state)
    contact = ground_contact_force(
        kinematics.foot_position[..., 1],
        kinematics.foot_velocity,
        cfg,
        friction=world.friction[:, None],
        restitution=world.restitution[:, None],
    )
    return state.replace(contact=contact)


def step(
    state: RobotState,
    joint_torques: np.ndarray,
    cfg: PhysicsConfig,
    model: RobotModel,
    world: Optional[WorldParams] = None,
) -> RobotState:
    """Advance every environment by ``cfg.dt``.

    Torques are held for the whole step, which is split into ``cfg.substeps``
    semi-implicit Euler substeps. Contact damping and friction enter the velocity
    update implicitly through their linearization.

    Args:
        state: Batched state
        joint_torques: (N, 4) torques, already clamped to the actuator limit
        cfg: Physics configuration
        model: Robot model, shared or per-environment
        world: Per-environment friction, restitution and gravity

    Returns:
        New state with refreshed contact

    Raises:
        NumericalDivergence: Some environment left the finite, bounded region; those
            environments are frozen at their last good state in ``error.state``
    """
    num_envs = state.num_envs
    world = world or WorldParams.nominal(cfg, num_envs)
    torques = np.asarray(joint_torques, dtype=float)
    h = cfg.dt / cfg.substeps
    friction = world.friction[:, None]
    restitution = world.restitution[:, None]

    q = state.q
    qd = state.qd
    diverged = np.zeros(num_envs, dtype=bool)

    for _ in range(cfg.substeps):
        current = RobotState(q=q, qd=qd, time=state.time, contact=state.contact)
        frames = link_frames(model, q)
        subspace = motion_subspaces(frames)
        kinematics = forward_kinematics(model, current, frames)
        contact = ground_contact_force(
            kinematics.foot_position[..., 1],
            kinematics.foot_velocity,
            cfg,
            friction=friction,
            restitution=restitution,
        )
        jacobian = foot_jacobians(frames, subspace)
        slopes = contact_damping(contact, cfg, friction=friction, restitution=restitution)
        damping = h * np.einsum("nlki,nlk,nlkj->nij", jacobian, slopes, jacobian)

        forces = np.zeros_like(q)
        forces[:, ACTUATED] = torques
        forces[:, SLIDERS] = passive_slider_forces(model, current)
        qdd = generalized_accelerations(
            model,
            current,
            forces,
            foot_forces=contact.force_vector,
            gravity=world.gravity,
            damping=damping,
            frames=frames,
            subspace=subspace,
        )
        q_next, qd_next = semi_implicit_euler(q, qd, qdd, h)

        diverged |= _out_of_bounds(q_next, qd_next, cfg.divergence_bound)
        q = np.where(diverged[:, None], state.q, q_next)
        qd = np.where(diverged[:, None], state.qd, qd_next)

    time = np.where(diverged, state.time, state.time + cfg.dt)
    result = refresh_contact(
        RobotState(q=q, qd=qd, time=time, contact=state.contact), cfg, model, world
    )

    if diverged.any():
        logger.warning(f"Integrator diverged in {int(diverged.sum())} of {num_envs} environments")
        raise NumericalDivergence(diverged, result)
    return result
