"""Reinforcement-learning environment for the planar compliant-foot quadruped."""

from src.env.gait import gait_clock, raibert_foot_target
from src.env.locomotion_env import LocomotionEnv, Termination, check_termination
from src.env.observation import OBS_LAYOUT_VERSION, ObservationWindow, observe
from src.env.randomization import DomainRandomization, sample_domain_randomization
from src.env.rewards import RewardBreakdown, compute_reward

__all__ = [
    'OBS_LAYOUT_VERSION',
    'DomainRandomization',
    'LocomotionEnv',
    'ObservationWindow',
    'RewardBreakdown',
    'Termination',
    'check_termination',
    'compute_reward',
    'gait_clock',
    'observe',
    'raibert_foot_target',
    'sample_domain_randomization',
]
