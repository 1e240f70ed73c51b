"""Gait clock and Raibert foot placement for the alternating front/rear trot analog."""

from typing import Optional, Union

import numpy as np
from scipy.special import expit

from src.schemas import CommandState

ArrayLike = Union[float, np.ndarray]


def gait_phase(time: ArrayLike, cmd: CommandState) -> np.ndarray:
    """Per-foot phase in [0, 1), shape (..., 2) for (front, rear)."""
    time = np.asarray(time, dtype=float)
    offsets = np.asarray(cmd.phase_offsets, dtype=float)
    return np.mod(time[..., None] / cmd.gait_period + offsets, 1.0)


def phase_schedule(phase: ArrayLike, cmd: CommandState) -> np.ndarray:
    """Smoothed square wave of a phase: 1 in stance, 0 in swing, 0.5 at ``duty``."""
    return expit(cmd.clock_sharpness * (cmd.duty_factor - np.asarray(phase, dtype=float)))


def gait_clock(time: ArrayLike, cmd: CommandState) -> np.ndarray:
    """Commanded contact schedule C in [0, 1] per foot, shape (..., 2)."""
    return phase_schedule(gait_phase(time, cmd), cmd)


def clock_signals(time: ArrayLike, cmd: CommandState) -> np.ndarray:
    """sin/cos of the front-foot phase, shape (..., 2)."""
    angle = 2.0 * np.pi * gait_phase(time, cmd)[..., 0]
    return np.stack([np.sin(angle), np.cos(angle)], axis=-1)


def raibert_foot_target(
    hip_x: ArrayLike,
    v_x: ArrayLike,
    cmd: CommandState,
    v_x_cmd: Optional[ArrayLike] = None,
) -> np.ndarray:
    """Touchdown x target: half the stance sweep ahead of the hip, plus velocity feedback.

    Args:
        hip_x: Hip x position in m
        v_x: Measured forward velocity in m/s
        cmd: Command defaults (period, duty, feedback gain)
        v_x_cmd: Commanded velocity overriding ``cmd.v_x_cmd``, e.g. per environment
    """
    command = cmd.v_x_cmd if v_x_cmd is None else np.asarray(v_x_cmd, dtype=float)
    stance_time = cmd.duty_factor * cmd.gait_period
    feedback = cmd.raibert_gain * (np.asarray(v_x, dtype=float) - command)
    return np.asarray(hip_x, dtype=float) + 0.5 * stance_time * command + feedback
