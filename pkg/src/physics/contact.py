"""Penalty ground contact and the passive spring foot law."""

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from src.schemas import PhysicsConfig, SpringFootParams

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class ContactState:
    """Per-foot contact quantities, batched as (num_envs, 2) for front and rear.

    ``foot_velocity`` is (num_envs, 2, 2) holding (vx, vz) of each foot pad.
    """

    in_contact: np.ndarray
    normal_force: np.ndarray
    tangential_force: np.ndarray
    penetration: np.ndarray
    foot_velocity: np.ndarray

    @property
    def force_vector(self) -> np.ndarray:
        """World-frame (Fx, Fz) ground force on each foot, shape (..., 2, 2)."""
        return np.stack([self.tangential_force, self.normal_force], axis=-1)

    @classmethod
    def empty(cls, num_envs: int) -> "ContactState":
        zeros = np.zeros((num_envs, 2))
        return cls(
            in_contact=np.zeros((num_envs, 2), dtype=bool),
            normal_force=zeros.copy(),
            tangential_force=zeros.copy(),
            penetration=zeros.copy(),
            foot_velocity=np.zeros((num_envs, 2, 2)),
        )


def spring_foot_force(
    deflection: ArrayLike,
    deflection_rate: ArrayLike,
    params: SpringFootParams,
) -> ArrayLike:
    """Axial force of the foot spring opposing compression.

    Args:
        deflection: Compression from free length in m
        deflection_rate: Compression rate in m/s
        params: Spring parameters

    Returns:
        k*d + c*d_dot, plus the hard-stop term beyond ``max_travel``
    """
    deflection = np.asarray(deflection, dtype=float)
    force = params.stiffness * deflection + params.damping * np.asarray(deflection_rate, dtype=float)
    overshoot = np.maximum(deflection - params.max_travel, 0.0)
    force = force + params.hard_stop_stiffness * overshoot
    return force if force.ndim else float(force)


def slider_extension_force(deflection: ArrayLike, params: SpringFootParams) -> ArrayLike:
    """Restoring force of the extension stop at zero deflection (positive compresses)."""
    deflection = np.asarray(deflection, dtype=float)
    force = params.hard_stop_stiffness * np.maximum(-deflection, 0.0)
    return force if force.ndim else float(force)


def spring_potential_energy(deflection: ArrayLike, params: SpringFootParams) -> ArrayLike:
    """Elastic energy stored in the spring and both stops."""
    deflection = np.asarray(deflection, dtype=float)
    overshoot = np.maximum(deflection - params.max_travel, 0.0)
    extension = np.maximum(-deflection, 0.0)
    energy = 0.5 * params.stiffness * deflection**2
    energy = energy + 0.5 * params.hard_stop_stiffness * (overshoot**2 + extension**2)
    return energy if energy.ndim else float(energy)


def ground_contact_force(
    foot_height: ArrayLike,
    foot_velocity: np.ndarray,
    cfg: PhysicsConfig,
    friction: Optional[ArrayLike] = None,
    restitution: Optional[ArrayLike] = None,
) -> ContactState:
    """Penalty normal force with regularized Coulomb friction.

    Args:
        foot_height: Signed distance of each foot pad to the ground, negative when penetrating
        foot_velocity: (..., 2) foot pad velocity (vx, vz)
        cfg: Physics configuration
        friction: Per-environment friction coefficient, broadcast against ``foot_height``
        restitution: Per-environment restitution surrogate

    Returns:
        ContactState with the same leading shape as ``foot_height``
    """
    height = np.asarray(foot_height, dtype=float)
    velocity = np.asarray(foot_velocity, dtype=float)
    mu = cfg.friction_coefficient if friction is None else np.asarray(friction, dtype=float)
    rest = cfg.restitution_surrogate if restitution is None else np.asarray(restitution, dtype=float)

    in_contact = height < 0.0
    damping = cfg.ground_normal_damping * (1.0 - rest)
    normal = -cfg.ground_normal_stiffness * height - damping * velocity[..., 1]
    normal = np.where(in_contact, np.maximum(normal, 0.0), 0.0)
    tangential = -mu * normal * np.tanh(velocity[..., 0] / cfg.friction_regularization_velocity)

    return ContactState(
        in_contact=in_contact,
        normal_force=normal,
        tangential_force=tangential,
        penetration=np.where(in_contact, -height, 0.0),
        foot_velocity=velocity,
    )


def contact_damping(
    contact: ContactState,
    cfg: PhysicsConfig,
    friction: Optional[ArrayLike] = None,
    restitution: Optional[ArrayLike] = None,
) -> np.ndarray:
    """Non-negative slopes -dF/dv of the contact law, shape (..., 2) as (tangential, normal).

    Used by the integrator to treat contact damping implicitly.
    """
    mu = cfg.friction_coefficient if friction is None else np.asarray(friction, dtype=float)
    rest = cfg.restitution_surrogate if restitution is None else np.asarray(restitution, dtype=float)
    v_eps = cfg.friction_regularization_velocity

    loaded = contact.normal_force > 0.0
    sech2 = 1.0 - np.tanh(contact.foot_velocity[..., 0] / v_eps) ** 2
    tangential = mu * contact.normal_force * sech2 / v_eps
    normal = np.where(loaded, cfg.ground_normal_damping * (1.0 - rest), 0.0)
    return np.stack([tangential, normal * np.ones_like(tangential)], axis=-1)
