"""Planar rigid-body physics: robot model, contact and time stepping."""

from src.physics.contact import ContactState, ground_contact_force, spring_foot_force
from src.physics.robot import (
    ACTUATED,
    ACTUATED_NAMES,
    COORDINATE_NAMES,
    SLIDERS,
    RobotModel,
    RobotState,
    compute_dynamics,
    forward_kinematics,
    mass_matrix,
    total_mechanical_energy,
)
from src.physics.simulator import WorldParams, step

__all__ = [
    'ACTUATED',
    'ACTUATED_NAMES',
    'COORDINATE_NAMES',
    'SLIDERS',
    'ContactState',
    'RobotModel',
    'RobotState',
    'WorldParams',
    'compute_dynamics',
    'forward_kinematics',
    'ground_contact_force',
    'mass_matrix',
    'spring_foot_force',
    'step',
    'total_mechanical_energy',
]
