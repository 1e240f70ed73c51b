"""Tests for kinematics, the mass matrix and inverse dynamics of the planar robot."""

import numpy as np
import pytest

from src.exceptions import SingularMass
from src.physics.robot import (
    NUM_COORDS,
    SLIDERS,
    RobotModel,
    RobotState,
    body_centers,
    check_positive_definite,
    describe_zero_pose,
    foot_jacobians,
    forward_kinematics,
    generalized_accelerations,
    inverse_dynamics,
    link_frames,
    mass_matrix,
    motion_subspaces,
)
from src.schemas import RobotModelConfig


def random_coordinates(rng, samples):
    q = rng.uniform(-1.0, 1.0, (samples, NUM_COORDS))
    q[:, SLIDERS] = rng.uniform(0.0, 0.03, (samples, 2))
    return q


def test_total_mass(model):
    """Torso, four rods and two foot pads."""
    assert model.total_mass[0] == pytest.approx(10.0 + 4 * 0.5 + 2 * 0.1)


def test_zero_pose_geometry(model):
    description = describe_zero_pose(model)
    leg = 0.2 + 0.2 + 0.02
    np.testing.assert_allclose(description["hip_positions"], [[0.25, 0.0], [-0.25, 0.0]], atol=1e-12)
    np.testing.assert_allclose(description["knee_positions"], [[0.25, -0.2], [-0.25, -0.2]], atol=1e-12)
    np.testing.assert_allclose(description["foot_positions"], [[0.25, -leg], [-0.25, -leg]], atol=1e-12)
    assert all(value > 0 for value in description["mass_matrix_eigenvalues"])


def test_standing_puts_lowest_foot_at_clearance(model):
    state = RobotState.standing(model, 3, clearance=0.05)
    feet = forward_kinematics(model, state).foot_position
    np.testing.assert_allclose(feet[..., 1].min(axis=1), 0.05, atol=1e-12)


def test_mass_matrix_symmetric_positive_definite(model, rng):
    q = random_coordinates(rng, 32)
    matrix = mass_matrix(model, q)
    np.testing.assert_allclose(matrix, np.swapaxes(matrix, 1, 2), atol=1e-12)
    check_positive_definite(matrix)
    assert np.all(np.linalg.eigvalsh(matrix) > 0)


def test_translation_block_is_total_mass(model, rng):
    matrix = mass_matrix(model, random_coordinates(rng, 8))
    np.testing.assert_allclose(matrix[:, 0, 0], model.total_mass[0])
    np.testing.assert_allclose(matrix[:, 1, 1], model.total_mass[0])
    np.testing.assert_allclose(matrix[:, 0, 1], 0.0, atol=1e-12)


def test_armature_on_actuated_diagonal(s5_spring, rng):
    q = random_coordinates(rng, 4)
    bare = RobotModel.from_config(RobotModelConfig(armature=0.0), s5_spring)
    geared = RobotModel.from_config(RobotModelConfig(armature=0.05), s5_spring)
    difference = mass_matrix(geared, q) - mass_matrix(bare, q)
    expected = np.zeros((NUM_COORDS, NUM_COORDS))
    expected[[3, 4, 5, 6], [3, 4, 5, 6]] = 0.05
    np.testing.assert_allclose(difference, np.broadcast_to(expected, difference.shape), atol=1e-12)


def test_kinetic_energy_matches_body_velocities(bare_model, rng):
    """0.5 qd' M qd equals the sum of translational and rotational body energies."""
    q = random_coordinates(rng, 6)
    qd = rng.uniform(-1.0, 1.0, q.shape)
    eps = 1e-6
    velocity = (
        body_centers(link_frames(bare_model, q + eps * qd))
        - body_centers(link_frames(bare_model, q - eps * qd))
    ) / (2 * eps)
    rates = np.stack(
        [
            np.zeros(6),
            np.zeros(6),
            qd[:, 2],
            qd[:, 2] + qd[:, 3],
            qd[:, 2] + qd[:, 3] + qd[:, 4],
            qd[:, 2] + qd[:, 5],
            qd[:, 2] + qd[:, 5] + qd[:, 6],
            np.zeros(6),
            np.zeros(6),
        ],
        axis=1,
    )
    expected = 0.5 * (
        (bare_model.body_mass * (velocity**2).sum(axis=-1)).sum(axis=1)
        + (bare_model.body_inertia * rates**2).sum(axis=1)
    )
    matrix = mass_matrix(bare_model, q)
    kinetic = 0.5 * np.einsum("ni,nij,nj->n", qd, matrix, qd)
    np.testing.assert_allclose(kinetic, expected, rtol=1e-6)


def test_foot_velocity_matches_finite_difference(model, rng):
    q = random_coordinates(rng, 5)
    qd = rng.uniform(-1.0, 1.0, q.shape)
    eps = 1e-6
    state = RobotState.from_coordinates(q, qd)
    velocity = forward_kinematics(model, state).foot_velocity
    plus = link_frames(model, q + eps * qd).feet
    minus = link_frames(model, q - eps * qd).feet
    np.testing.assert_allclose(velocity, (plus - minus) / (2 * eps), atol=1e-7)


def test_foot_jacobian_maps_joint_rates(model, rng):
    q = random_coordinates(rng, 5)
    qd = rng.uniform(-1.0, 1.0, q.shape)
    frames = link_frames(model, q)
    jacobian = foot_jacobians(frames, motion_subspaces(frames))
    velocity = forward_kinematics(model, RobotState.from_coordinates(q, qd), frames).foot_velocity
    np.testing.assert_allclose(np.einsum("nlkj,nj->nlk", jacobian, qd), velocity, atol=1e-12)


def test_inverse_dynamics_columns_are_mass_matrix(bare_model, rng):
    """With zero velocity and gravity, ID of a unit acceleration is a mass-matrix column."""
    q = random_coordinates(rng, 3)
    matrix = mass_matrix(bare_model, q)
    for i in range(NUM_COORDS):
        qdd = np.zeros_like(q)
        qdd[:, i] = 1.0
        column = inverse_dynamics(bare_model, q, np.zeros_like(q), qdd, gravity=(0.0, 0.0))
        np.testing.assert_allclose(column, matrix[:, :, i], atol=1e-10)


def test_forward_and_inverse_dynamics_agree(bare_model, rng):
    q = random_coordinates(rng, 4)
    qd = rng.uniform(-2.0, 2.0, q.shape)
    forces = rng.uniform(-5.0, 5.0, q.shape)
    foot_forces = rng.uniform(-20.0, 20.0, (4, 2, 2))
    state = RobotState.from_coordinates(q, qd)
    qdd = generalized_accelerations(bare_model, state, forces, foot_forces=foot_forces)
    recovered = inverse_dynamics(bare_model, q, qd, qdd, foot_forces=foot_forces)
    np.testing.assert_allclose(recovered, forces, atol=1e-8)


def test_gravity_load_on_base_is_weight(model):
    """Holding the robot still takes its weight on the vertical coordinate."""
    q = RobotState.standing(model, 1).q
    load = inverse_dynamics(model, q, np.zeros_like(q), np.zeros_like(q))
    assert load[0, 1] == pytest.approx(model.total_mass[0] * 9.81)
    assert load[0, 0] == pytest.approx(0.0, abs=1e-12)


def test_singular_mass_detected():
    with pytest.raises(SingularMass):
        check_positive_definite(np.zeros((1, 3, 3)))


def test_with_payload_adds_mass(model):
    heavy = model.with_payload(np.array([0.0, 2.0]), np.array([0.0, 0.01]))
    np.testing.assert_allclose(heavy.total_mass, model.total_mass[0] + np.array([0.0, 2.0]))
    np.testing.assert_allclose(heavy.torso_com_offset, [0.0, 0.01])
