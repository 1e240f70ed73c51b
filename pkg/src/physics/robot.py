"""Planar quadruped model: kinematics, mass matrix and inverse dynamics.

The robot is a sagittal torso carrying a front and a rear leg. Each leg has an actuated
hip and knee and a passive foot slider, giving nine generalized coordinates::

    q = [x, z, pitch, hip_front, knee_front, hip_rear, knee_rear, slider_front, slider_rear]

Dynamics use planar spatial vectors expressed in world coordinates about the world
origin, ordered (angular, linear x, linear z). Angles are counter-clockwise in the x-z
plane (x forward, z up), so a positive pitch raises the nose. A link at absolute angle
``a`` points along ``(sin a, -cos a)``; the zero pose hangs both legs straight down.

Every array is batched over environments on the leading axis.
"""

import dataclasses
import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from src.exceptions import SingularMass
from src.physics.contact import (
    ContactState,
    slider_extension_force,
    spring_foot_force,
    spring_potential_energy,
)
from src.schemas import RobotModelConfig, SpringFootParams

logger = logging.getLogger(__name__)

COORDINATE_NAMES = (
    "x",
    "z",
    "pitch",
    "hip_front",
    "knee_front",
    "hip_rear",
    "knee_rear",
    "slider_front",
    "slider_rear",
)
NUM_COORDS = len(COORDINATE_NAMES)
ACTUATED = np.array([3, 4, 5, 6])
SLIDERS = np.array([7, 8])
ACTUATED_NAMES = tuple(COORDINATE_NAMES[i] for i in ACTUATED)
PARENT = (-1, 0, 1, 2, 3, 2, 5, 4, 6)
FOOT_BODIES = (7, 8)
DEFAULT_GRAVITY = (0.0, -9.81)


def _ancestors(body: int) -> Tuple[int, ...]:
    chain = []
    while body >= 0:
        chain.append(body)
        body = PARENT[body]
    return tuple(chain)


FOOT_CHAINS = tuple(_ancestors(body) for body in FOOT_BODIES)

# (descendant, ancestor) pairs that carry off-diagonal mass-matrix entries
_PAIRS = np.array([(i, j) for i in range(NUM_COORDS) for j in _ancestors(i)[1:]])


@dataclass(frozen=True)
class RobotModel:
    """Immutable mass and geometry description.

    ``body_mass`` and ``body_inertia`` are (B, 9) with B = 1 for a shared model or
    B = num_envs for a per-environment payload model. Bodies 0 and 1 are the massless
    carriers of the x and z base coordinates.
    """

    body_mass: np.ndarray
    body_inertia: np.ndarray
    torso_com_offset: np.ndarray
    torso_length: float
    thigh_length: np.ndarray
    shank_length: np.ndarray
    hip_offset_x: np.ndarray
    foot: SpringFootParams
    joint_limits: np.ndarray
    torque_limit: float
    armature: float
    default_pose: np.ndarray

    actuated_joint_count = 4
    passive_joint_count = 2

    @classmethod
    def from_config(cls, config: RobotModelConfig, foot: SpringFootParams) -> "RobotModel":
        legs = (config.front, config.rear)
        mass = np.zeros((1, NUM_COORDS))
        inertia = np.zeros((1, NUM_COORDS))
        mass[0, 2] = config.torso_mass
        inertia[0, 2] = config.torso_inertia
        for leg, (thigh, shank, foot_body) in zip(legs, ((3, 4, 7), (5, 6, 8))):
            mass[0, thigh] = leg.thigh_mass
            mass[0, shank] = leg.shank_mass
            inertia[0, thigh] = leg.thigh_mass * leg.thigh_length**2 / 12.0
            inertia[0, shank] = leg.shank_mass * leg.shank_length**2 / 12.0
            mass[0, foot_body] = foot.foot_mass

        return cls(
            body_mass=mass,
            body_inertia=inertia,
            torso_com_offset=np.zeros(1),
            torso_length=config.torso_length,
            thigh_length=np.array([leg.thigh_length for leg in legs]),
            shank_length=np.array([leg.shank_length for leg in legs]),
            hip_offset_x=np.array([leg.hip_offset_x for leg in legs]),
            foot=foot,
            joint_limits=np.array([config.hip_limits, config.knee_limits] * 2, dtype=float),
            torque_limit=config.torque_limit,
            armature=config.armature,
            default_pose=np.array([config.default_hip, config.default_knee] * 2),
        )

    def with_foot(self, foot: SpringFootParams) -> "RobotModel":
        """Same robot with a different foot spring."""
        mass = self.body_mass.copy()
        mass[:, list(FOOT_BODIES)] = foot.foot_mass
        return dataclasses.replace(self, foot=foot, body_mass=mass)

    def with_payload(
        self,
        added_mass: Union[float, np.ndarray],
        com_shift: Union[float, np.ndarray],
    ) -> "RobotModel":
        """Per-environment model with extra torso mass and a shifted torso center of mass.

        The added mass is a point load at the shifted center, so the torso rotational
        inertia about its own center is unchanged.
        """
        added_mass = np.atleast_1d(np.asarray(added_mass, dtype=float))
        com_shift = np.atleast_1d(np.asarray(com_shift, dtype=float))
        batch = max(added_mass.shape[0], com_shift.shape[0], self.body_mass.shape[0])
        mass = np.broadcast_to(self.body_mass, (batch, NUM_COORDS)).copy()
        inertia = np.broadcast_to(self.body_inertia, (batch, NUM_COORDS)).copy()
        mass[:, 2] = mass[:, 2] + added_mass
        return dataclasses.replace(
            self,
            body_mass=mass,
            body_inertia=inertia,
            torso_com_offset=np.broadcast_to(com_shift, (batch,)).copy(),
        )

    @property
    def total_mass(self) -> np.ndarray:
        return self.body_mass.sum(axis=-1)

    def leg_length(self, leg: int) -> float:
        """Hip-to-pad length with the slider at its free length."""
        return float(self.thigh_length[leg] + self.shank_length[leg] + self.foot.free_length)


@dataclass(frozen=True)
class RobotState:
    """Batched mechanical state of the planar quadruped."""

    q: np.ndarray
    qd: np.ndarray
    time: np.ndarray
    contact: ContactState

    @property
    def num_envs(self) -> int:
        return self.q.shape[0]

    @property
    def base_x(self) -> np.ndarray:
        return self.q[:, 0]

    @property
    def base_z(self) -> np.ndarray:
        return self.q[:, 1]

    @property
    def pitch(self) -> np.ndarray:
        return self.q[:, 2]

    @property
    def joint_q(self) -> np.ndarray:
        return self.q[:, ACTUATED]

    @property
    def joint_qd(self) -> np.ndarray:
        return self.qd[:, ACTUATED]

    @property
    def slider(self) -> np.ndarray:
        return self.q[:, SLIDERS]

    @property
    def slider_rate(self) -> np.ndarray:
        return self.qd[:, SLIDERS]

    def replace(self, **changes) -> "RobotState":
        return dataclasses.replace(self, **changes)

    def select(self, mask: np.ndarray, other: "RobotState") -> "RobotState":
        """Take this state where ``mask`` is True and ``other`` elsewhere."""
        rows = np.asarray(mask, dtype=bool)
        pick = lambda a, b: np.where(rows.reshape((-1,) + (1,) * (a.ndim - 1)), a, b)  # noqa: E731
        contact = ContactState(
            **{
                field.name: pick(getattr(self.contact, field.name), getattr(other.contact, field.name))
                for field in dataclasses.fields(ContactState)
            }
        )
        return RobotState(
            q=pick(self.q, other.q),
            qd=pick(self.qd, other.qd),
            time=pick(self.time, other.time),
            contact=contact,
        )

    @classmethod
    def from_coordinates(
        cls,
        q: np.ndarray,
        qd: Optional[np.ndarray] = None,
        time: Optional[np.ndarray] = None,
    ) -> "RobotState":
        q = np.atleast_2d(np.asarray(q, dtype=float))
        num_envs = q.shape[0]
        return cls(
            q=q.copy(),
            qd=np.zeros_like(q) if qd is None else np.atleast_2d(np.asarray(qd, dtype=float)).copy(),
            time=np.zeros(num_envs) if time is None else np.asarray(time, dtype=float).copy(),
            contact=ContactState.empty(num_envs),
        )

    @classmethod
    def standing(
        cls,
        model: RobotModel,
        num_envs: int = 1,
        joint_q: Optional[np.ndarray] = None,
        clearance: float = 0.0,
    ) -> "RobotState":
        """State with the lowest foot pad ``clearance`` above the ground, at rest."""
        q = np.zeros((num_envs, NUM_COORDS))
        q[:, ACTUATED] = model.default_pose if joint_q is None else joint_q
        frames = link_frames(model, q)
        q[:, 1] = clearance - frames.feet[:, :, 1].min(axis=1)
        return cls.from_coordinates(q)


@dataclass(frozen=True)
class LinkFrames:
    """World positions of the joints, pads and link centers for a batch of poses."""

    base: np.ndarray
    axis: np.ndarray
    hips: np.ndarray
    knees: np.ndarray
    feet: np.ndarray
    thigh_dir: np.ndarray
    shank_dir: np.ndarray
    torso_com: np.ndarray
    thigh_com: np.ndarray
    shank_com: np.ndarray


@dataclass(frozen=True)
class FootKinematics:
    """Output of forward kinematics, each (num_envs, 2 legs, 2 coords)."""

    foot_position: np.ndarray
    foot_velocity: np.ndarray
    hip_position: np.ndarray
    knee_position: np.ndarray


def _direction(angle: np.ndarray) -> np.ndarray:
    return np.stack([np.sin(angle), -np.cos(angle)], axis=-1)


def _perp(vector: np.ndarray) -> np.ndarray:
    """Counter-clockwise quarter turn, i.e. unit angular rate crossed with ``vector``."""
    return np.stack([-vector[..., 1], vector[..., 0]], axis=-1)


def link_frames(model: RobotModel, q: np.ndarray) -> LinkFrames:
    """Positions of every joint and body center for coordinates ``q`` (N, 9)."""
    pitch = q[:, 2]
    base = q[:, 0:2]
    axis = np.stack([np.cos(pitch), np.sin(pitch)], axis=-1)
    hips = base[:, None, :] + model.hip_offset_x[None, :, None] * axis[:, None, :]

    thigh_angle = pitch[:, None] + q[:, [3, 5]]
    shank_angle = thigh_angle + q[:, [4, 6]]
    thigh_dir = _direction(thigh_angle)
    shank_dir = _direction(shank_angle)

    knees = hips + model.thigh_length[None, :, None] * thigh_dir
    pad_distance = model.shank_length[None, :] + model.foot.free_length - q[:, SLIDERS]
    feet = knees + pad_distance[..., None] * shank_dir
    torso_com = base + model.torso_com_offset[:, None] * axis

    return LinkFrames(
        base=base,
        axis=axis,
        hips=hips,
        knees=knees,
        feet=feet,
        thigh_dir=thigh_dir,
        shank_dir=shank_dir,
        torso_com=torso_com,
        thigh_com=hips + 0.5 * model.thigh_length[None, :, None] * thigh_dir,
        shank_com=knees + 0.5 * model.shank_length[None, :, None] * shank_dir,
    )


def forward_kinematics(
    model: RobotModel,
    state: RobotState,
    frames: Optional[LinkFrames] = None,
) -> FootKinematics:
    """World positions and velocities of the foot pads, plus hip and knee positions."""
    frames = frames or link_frames(model, state.q)
    qd = state.qd
    pitch_rate = qd[:, 2]
    thigh_rate = pitch_rate[:, None] + qd[:, [3, 5]]
    shank_rate = thigh_rate + qd[:, [4, 6]]

    hip_velocity = (
        qd[:, None, 0:2]
        + (model.hip_offset_x[None, :] * pitch_rate[:, None])[..., None] * _perp(frames.axis)[:, None, :]
    )
    knee_velocity = hip_velocity + (model.thigh_length[None, :] * thigh_rate)[..., None] * _perp(
        frames.thigh_dir
    )
    pad_distance = model.shank_length[None, :] + model.foot.free_length - state.q[:, SLIDERS]
    foot_velocity = (
        knee_velocity
        + (pad_distance * shank_rate)[..., None] * _perp(frames.shank_dir)
        - qd[:, SLIDERS][..., None] * frames.shank_dir
    )
    return FootKinematics(
        foot_position=frames.feet,
        foot_velocity=foot_velocity,
        hip_position=frames.hips,
        knee_position=frames.knees,
    )


def motion_subspaces(frames: LinkFrames) -> np.ndarray:
    """Joint motion subspaces S_i in world coordinates, shape (N, 9, 3)."""
    num_envs = frames.base.shape[0]
    subspace = np.zeros((num_envs, NUM_COORDS, 3))
    subspace[:, 0, 1] = 1.0
    subspace[:, 1, 2] = 1.0

    def revolute(point: np.ndarray) -> np.ndarray:
        return np.stack([np.ones(num_envs), point[:, 1], -point[:, 0]], axis=-1)

    subspace[:, 2] = revolute(frames.base)
    subspace[:, 3] = revolute(frames.hips[:, 0])
    subspace[:, 4] = revolute(frames.knees[:, 0])
    subspace[:, 5] = revolute(frames.hips[:, 1])
    subspace[:, 6] = revolute(frames.knees[:, 1])
    # Compression moves the pad toward the knee
    subspace[:, 7, 1:] = -frames.shank_dir[:, 0]
    subspace[:, 8, 1:] = -frames.shank_dir[:, 1]
    return subspace


def body_centers(frames: LinkFrames) -> np.ndarray:
    """Center of mass of every body, shape (N, 9, 2)."""
    return np.stack(
        [
            frames.base,
            frames.base,
            frames.torso_com,
            frames.thigh_com[:, 0],
            frames.shank_com[:, 0],
            frames.thigh_com[:, 1],
            frames.shank_com[:, 1],
            frames.feet[:, 0],
            frames.feet[:, 1],
        ],
        axis=1,
    )


def spatial_inertias(model: RobotModel, centers: np.ndarray) -> np.ndarray:
    """Spatial inertia of every body about the world origin, shape (N, 9, 3, 3)."""
    mass = np.broadcast_to(model.body_mass, centers.shape[:2])
    inertia = np.broadcast_to(model.body_inertia, centers.shape[:2])
    cx = centers[..., 0]
    cz = centers[..., 1]
    result = np.zeros(centers.shape[:2] + (3, 3))
    result[..., 0, 0] = inertia + mass * (cx**2 + cz**2)
    result[..., 0, 1] = result[..., 1, 0] = -mass * cz
    result[..., 0, 2] = result[..., 2, 0] = mass * cx
    result[..., 1, 1] = mass
    result[..., 2, 2] = mass
    return result


def cross_motion(v: np.ndarray, m: np.ndarray) -> np.ndarray:
    """Planar spatial motion cross product v x m."""
    return np.stack(
        [
            np.zeros_like(v[..., 0]),
            v[..., 2] * m[..., 0] - v[..., 0] * m[..., 2],
            -v[..., 1] * m[..., 0] + v[..., 0] * m[..., 1],
        ],
        axis=-1,
    )


def cross_force(v: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Planar spatial force cross product v x* f."""
    return np.stack(
        [
            -v[..., 2] * f[..., 1] + v[..., 1] * f[..., 2],
            -v[..., 0] * f[..., 2],
            v[..., 0] * f[..., 1],
        ],
        axis=-1,
    )


def point_force(point: np.ndarray, force: np.ndarray) -> np.ndarray:
    """Spatial force of a planar force applied at ``point``."""
    moment = point[..., 0] * force[..., 1] - point[..., 1] * force[..., 0]
    return np.concatenate([moment[..., None], force], axis=-1)


def mass_matrix(
    model: RobotModel,
    q: np.ndarray,
    frames: Optional[LinkFrames] = None,
    subspace: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Joint-space inertia by composite-rigid-body accumulation, shape (N, 9, 9).

    Actuator armature is added on the actuated diagonal.
    """
    frames = frames or link_frames(model, q)
    subspace = motion_subspaces(frames) if subspace is None else subspace
    composite = spatial_inertias(model, body_centers(frames)).copy()
    for body in range(NUM_COORDS - 1, 0, -1):
        composite[:, PARENT[body]] += composite[:, body]

    momentum = np.einsum("nbij,nbj->nbi", composite, subspace)
    num_envs = q.shape[0]
    matrix = np.zeros((num_envs, NUM_COORDS, NUM_COORDS))
    diagonal = np.arange(NUM_COORDS)
    matrix[:, diagonal, diagonal] = np.einsum("nbi,nbi->nb", momentum, subspace)
    off = np.einsum("npi,npi->np", momentum[:, _PAIRS[:, 0]], subspace[:, _PAIRS[:, 1]])
    matrix[:, _PAIRS[:, 0], _PAIRS[:, 1]] = off
    matrix[:, _PAIRS[:, 1], _PAIRS[:, 0]] = off
    matrix[:, ACTUATED, ACTUATED] += model.armature
    return matrix


def _gravity_rows(gravity: Union[Sequence[float], np.ndarray], num_envs: int) -> np.ndarray:
    return np.broadcast_to(np.asarray(gravity, dtype=float), (num_envs, 2))


def inverse_dynamics(
    model: RobotModel,
    q: np.ndarray,
    qd: np.ndarray,
    qdd: np.ndarray,
    gravity: Union[Sequence[float], np.ndarray] = DEFAULT_GRAVITY,
    foot_forces: Optional[np.ndarray] = None,
    frames: Optional[LinkFrames] = None,
    subspace: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Recursive Newton-Euler: generalized forces producing ``qdd``.

    Args:
        gravity: (2,) or (N, 2) gravity vector
        foot_forces: (N, 2, 2) world-frame ground force on each foot pad

    Returns:
        (N, 9) generalized forces, i.e. M qdd + C + G - J^T f_ext
    """
    frames = frames or link_frames(model, q)
    subspace = motion_subspaces(frames) if subspace is None else subspace
    inertia = spatial_inertias(model, body_centers(frames))
    num_envs = q.shape[0]
    gravity = _gravity_rows(gravity, num_envs)

    root_acceleration = np.concatenate([np.zeros((num_envs, 1)), -gravity], axis=-1)
    velocity = np.zeros((num_envs, NUM_COORDS, 3))
    acceleration = np.zeros((num_envs, NUM_COORDS, 3))
    force = np.zeros((num_envs, NUM_COORDS, 3))

    for body in range(NUM_COORDS):
        parent = PARENT[body]
        joint_velocity = subspace[:, body] * qd[:, body, None]
        parent_velocity = velocity[:, parent] if parent >= 0 else 0.0
        parent_acceleration = acceleration[:, parent] if parent >= 0 else root_acceleration
        velocity[:, body] = parent_velocity + joint_velocity
        acceleration[:, body] = (
            parent_acceleration
            + subspace[:, body] * qdd[:, body, None]
            + cross_motion(velocity[:, body], joint_velocity)
        )
        momentum = np.einsum("nij,nj->ni", inertia[:, body], velocity[:, body])
        force[:, body] = np.einsum("nij,nj->ni", inertia[:, body], acceleration[:, body]) + cross_force(
            velocity[:, body], momentum
        )

    if foot_forces is not None:
        for leg, body in enumerate(FOOT_BODIES):
            force[:, body] -= point_force(frames.feet[:, leg], foot_forces[:, leg])

    generalized = np.zeros((num_envs, NUM_COORDS))
    for body in range(NUM_COORDS - 1, -1, -1):
        generalized[:, body] = np.einsum("ni,ni->n", subspace[:, body], force[:, body])
        if PARENT[body] >= 0:
            force[:, PARENT[body]] += force[:, body]
    return generalized


def foot_jacobians(frames: LinkFrames, subspace: np.ndarray) -> np.ndarray:
    """Linear velocity Jacobian of each foot pad, shape (N, 2 legs, 2, 9)."""
    num_envs = subspace.shape[0]
    jacobian = np.zeros((num_envs, 2, 2, NUM_COORDS))
    for leg, chain in enumerate(FOOT_CHAINS):
        point = frames.feet[:, leg]
        columns = subspace[:, list(chain)]
        jacobian[:, leg, 0, list(chain)] = columns[..., 1] - columns[..., 0] * point[:, None, 1]
        jacobian[:, leg, 1, list(chain)] = columns[..., 2] + columns[..., 0] * point[:, None, 0]
    return jacobian


def check_positive_definite(matrix: np.ndarray) -> None:
    """Raise SingularMass unless every matrix in the batch is positive definite."""
    try:
        np.linalg.cholesky(matrix)
    except np.linalg.LinAlgError as e:
        raise SingularMass(f"mass matrix is not positive definite: {e}") from e


def passive_slider_forces(model: RobotModel, state: RobotState) -> np.ndarray:
    """Generalized forces of the foot springs and slider stops, shape (N, 2)."""
    slider = state.slider
    return -spring_foot_force(slider, state.slider_rate, model.foot) + slider_extension_force(
        slider, model.foot
    )


def generalized_accelerations(
    model: RobotModel,
    state: RobotState,
    generalized_forces: np.ndarray,
    foot_forces: Optional[np.ndarray] = None,
    gravity: Union[Sequence[float], np.ndarray] = DEFAULT_GRAVITY,
    damping: Optional[np.ndarray] = None,
    frames: Optional[LinkFrames] = None,
    subspace: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Solve (M + damping) qdd = Q + J^T f_ext - C - G.

    Args:
        generalized_forces: (N, 9) applied generalized forces
        damping: Optional (N, 9, 9) positive semi-definite velocity-implicit term

    Raises:
        SingularMass: If M is not positive definite
    """
    frames = frames or link_frames(model, state.q)
    subspace = motion_subspaces(frames) if subspace is None else subspace
    matrix = mass_matrix(model, state.q, frames, subspace)
    check_positive_definite(matrix)
    bias = inverse_dynamics(
        model,
        state.q,
        state.qd,
        np.zeros_like(state.qd),
        gravity=gravity,
        foot_forces=foot_forces,
        frames=frames,
        subspace=subspace,
    )
    if damping is not None:
        matrix = matrix + damping
    rhs = generalized_forces - bias
    return np.linalg.solve(matrix, rhs[..., None])[..., 0]


def compute_dynamics(
    model: RobotModel,
    state: RobotState,
    torques: np.ndarray,
    external_forces: Optional[np.ndarray] = None,
    gravity: Union[Sequence[float], np.ndarray] = DEFAULT_GRAVITY,
) -> np.ndarray:
    """Generalized accelerations from joint torques, foot forces and the foot springs.

    Joint limits are not imposed here; the environment enforces them.

    Args:
        torques: (N, 4) actuated joint torques, already clamped
        external_forces: (N, 2, 2) world-frame force on each foot pad

    Returns:
        (N, 9) generalized accelerations
    """
    forces = np.zeros_like(state.q)
    forces[:, ACTUATED] = torques
    forces[:, SLIDERS] = passive_slider_forces(model, state)
    return generalized_accelerations(model, state, forces, external_forces, gravity)


def total_mechanical_energy(
    state: RobotState,
    model: RobotModel,
    springs: Optional[SpringFootParams] = None,
    gravity: Union[Sequence[float], np.ndarray] = DEFAULT_GRAVITY,
) -> np.ndarray:
    """Kinetic plus gravitational plus elastic energy per environment, in J."""
    springs = springs or model.foot
    frames = link_frames(model, state.q)
    matrix = mass_matrix(model, state.q, frames)
    kinetic = 0.5 * np.einsum("ni,nij,nj->n", state.qd, matrix, state.qd)

    centers = body_centers(frames)
    mass = np.broadcast_to(model.body_mass, centers.shape[:2])
    gravity = _gravity_rows(gravity, state.num_envs)
    potential = -np.einsum("nb,nbk,nk->n", mass, centers, gravity)
    elastic = spring_potential_energy(state.slider, springs).sum(axis=-1)
    return kinetic + potential + elastic


def describe_zero_pose(model: RobotModel) -> dict:
    """Zero-pose geometry, total mass and mass-matrix eigenvalues for inspection."""
    state = RobotState.from_coordinates(np.zeros(NUM_COORDS))
    frames = link_frames(model, state.q)
    eigenvalues = np.linalg.eigvalsh(mass_matrix(model, state.q, frames))[0]
    return {
        "total_mass_kg": float(model.total_mass[0]),
        "hip_positions": frames.hips[0].tolist(),
        "knee_positions": frames.knees[0].tolist(),
        "foot_positions": frames.feet[0].tolist(),
        "mass_matrix_eigenvalues": eigenvalues.tolist(),
    }
