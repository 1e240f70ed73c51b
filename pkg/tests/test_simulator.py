"""Tests for the time stepper."""

import numpy as np
import pytest

from src.exceptions import NumericalDivergence
from src.physics.robot import RobotState, total_mechanical_energy
from src.physics.simulator import WorldParams, refresh_contact, semi_implicit_euler, step
from src.schemas import PhysicsConfig


def test_semi_implicit_euler_updates_velocity_first():
    x, v = semi_implicit_euler(np.array([0.0]), np.array([1.0]), np.array([2.0]), 0.5)
    assert v[0] == pytest.approx(2.0)
    assert x[0] == pytest.approx(1.0)


def test_step_advances_time_and_falls(model):
    physics = PhysicsConfig()
    state = RobotState.standing(model, 2, clearance=1.0)
    advanced = step(state, np.zeros((2, 4)), physics, model)
    np.testing.assert_allclose(advanced.time, physics.dt)
    assert np.all(advanced.base_z < state.base_z)
    assert np.all(advanced.qd[:, 1] < 0)


def test_airborne_robot_has_no_contact(model):
    state = refresh_contact(RobotState.standing(model, 1, clearance=0.5), PhysicsConfig(), model)
    assert not state.contact.in_contact.any()


def test_per_env_gravity(model):
    physics = PhysicsConfig()
    world = WorldParams(
        friction=np.ones(2),
        restitution=np.zeros(2),
        gravity=np.array([[0.0, -9.81], [0.0, 0.0]]),
    )
    state = RobotState.standing(model, 2, clearance=1.0)
    advanced = step(state, np.zeros((2, 4)), physics, model, world)
    assert advanced.base_z[0] < state.base_z[0]
    assert advanced.base_z[1] == pytest.approx(state.base_z[1])


def test_divergence_freezes_only_offending_env(model):
    physics = PhysicsConfig()
    state = RobotState.standing(model, 2, clearance=1.0)
    qd = state.qd.copy()
    qd[0, 0] = 2.0 * physics.divergence_bound
    state = state.replace(qd=qd)
    with pytest.raises(NumericalDivergence) as info:
        step(state, np.zeros((2, 4)), physics, model)
    error = info.value
    np.testing.assert_array_equal(error.mask, [True, False])
    np.testing.assert_array_equal(error.state.q[0], state.q[0])
    assert error.state.time[1] == pytest.approx(physics.dt)


def test_landing_produces_ground_force(model):
    physics = PhysicsConfig()
    state = RobotState.standing(model, 1, clearance=0.0)
    for _ in range(20):
        state = step(state, np.zeros((1, 4)), physics, model)
    assert state.contact.in_contact.any()
    assert state.contact.normal_force.sum() > 0


def test_energy_does_not_grow_when_dropped(model):
    """Contact and foot damping only dissipate."""
    physics = PhysicsConfig()
    state = RobotState.standing(model, 1, clearance=0.05)
    start = total_mechanical_energy(state, model)[0]
    for _ in range(100):
        state = step(state, np.zeros((1, 4)), physics, model)
    assert total_mechanical_energy(state, model)[0] < start + 1e-2 * abs(start)


def test_step_is_bit_identical_for_identical_inputs(model, rng):
    physics = PhysicsConfig()
    state = RobotState.standing(model, 3, clearance=0.01)
    torques = rng.uniform(-20.0, 20.0, size=(3, 4))
    first = step(state, torques, physics, model)
    second = step(state, torques.copy(), physics, model)
    assert np.array_equal(first.q, second.q)
    assert np.array_equal(first.qd, second.qd)
    assert np.array_equal(first.contact.normal_force, second.contact.normal_force)
