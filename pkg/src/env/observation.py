"""Rolling proprioceptive observation window."""

from typing import Optional, Sequence, Union

import numpy as np

from src.physics.robot import RobotState
from src.schemas import ObservationConfig

# Bump when the frame layout or flattening order changes; part of the checkpoint digest.
OBS_LAYOUT_VERSION = 1

FRAME_FIELDS = (
    "q_hip_front",
    "q_knee_front",
    "q_hip_rear",
    "q_knee_rear",
    "qd_hip_front",
    "qd_knee_front",
    "qd_hip_rear",
    "qd_knee_rear",
    "gravity_x",
    "gravity_z",
    "cmd_v_x",
    "cmd_v_y",
    "cmd_omega_z",
    "action_hip_front",
    "action_knee_front",
    "action_hip_rear",
    "action_knee_rear",
    "clock_sin",
    "clock_cos",
)
FRAME_SIZE = len(FRAME_FIELDS)
Q_SLICE = slice(0, 4)
QD_SLICE = slice(4, 8)
GRAVITY_SLICE = slice(8, 10)
COMMAND_SLICE = slice(10, 13)
ACTION_SLICE = slice(13, 17)
CLOCK_SLICE = slice(17, 19)

NoiseSource = Union[np.random.Generator, Sequence[np.random.Generator]]


class ObservationWindow:
    """Ring buffer of the last ``history_length`` frames per environment.

    Frames are stored oldest first; flattening is frame-major, so frame ``k`` occupies
    ``[k * FRAME_SIZE, (k + 1) * FRAME_SIZE)`` of the flat vector.
    """

    def __init__(self, num_envs: int, history_length: int = 40):
        self.num_envs = num_envs
        self.history_length = history_length
        self.buffer = np.zeros((num_envs, history_length, FRAME_SIZE))

    @property
    def size(self) -> int:
        return self.history_length * FRAME_SIZE

    def reset(self, env_ids: Optional[np.ndarray] = None) -> None:
        """Zero-pad the history of the given environments (all by default)."""
        if env_ids is None:
            self.buffer[:] = 0.0
        else:
            self.buffer[env_ids] = 0.0

    def push(self, frame: np.ndarray, env_ids: Optional[np.ndarray] = None) -> None:
        """Append the newest frame, dropping the oldest."""
        ids = slice(None) if env_ids is None else env_ids
        rows = self.buffer[ids]
        rows[:, :-1] = rows[:, 1:]
        rows[:, -1] = frame[ids]
        self.buffer[ids] = rows

    def flatten(self) -> np.ndarray:
        return self.buffer.reshape(self.num_envs, self.size).copy()

    @staticmethod
    def unflatten(flat: np.ndarray, history_length: int = 40) -> np.ndarray:
        flat = np.asarray(flat)
        return flat.reshape(flat.shape[:-1] + (history_length, FRAME_SIZE))


def gravity_in_body(pitch: np.ndarray) -> np.ndarray:
    """Unit gravity direction in the torso frame, (x forward, z up)."""
    return np.stack([-np.sin(pitch), -np.cos(pitch)], axis=-1)


def _standard_normal(
    noise_rng: NoiseSource,
    num_envs: int,
    width: int,
    env_ids: Optional[np.ndarray] = None,
) -> np.ndarray:
    if isinstance(noise_rng, np.random.Generator):
        return noise_rng.standard_normal((num_envs, width))
    # Per-environment streams advance only for the environments being observed
    noise = np.zeros((num_envs, width))
    for env_id in range(num_envs) if env_ids is None else env_ids:
        noise[env_id] = noise_rng[env_id].standard_normal(width)
    return noise


def build_frame(
    state: RobotState,
    commands: np.ndarray,
    last_action: np.ndarray,
    clock: np.ndarray,
    default_pose: np.ndarray,
    config: ObservationConfig = ObservationConfig(),
    noise_rng: Optional[NoiseSource] = None,
    env_ids: Optional[np.ndarray] = None,
) -> np.ndarray:
    """One 19-value frame per environment.

    Noise is added in physical units before scaling. Sliders are not observed. Only the
    generators of ``env_ids`` are drawn from when one generator per environment is given.
    """
    num_envs = state.num_envs
    joint_q = state.joint_q.copy()
    joint_qd = state.joint_qd.copy()
    gravity = gravity_in_body(state.pitch)

    if noise_rng is not None and config.add_noise:
        noise = _standard_normal(noise_rng, num_envs, 10, env_ids)
        joint_q += config.noise_q * noise[:, 0:4]
        joint_qd += config.noise_qd * noise[:, 4:8]
        gravity = gravity + config.noise_gravity * noise[:, 8:10]

    frame = np.empty((num_envs, FRAME_SIZE))
    frame[:, Q_SLICE] = joint_q - default_pose
    frame[:, QD_SLICE] = config.qd_scale * joint_qd
    frame[:, GRAVITY_SLICE] = gravity
    frame[:, COMMAND_SLICE] = config.command_scale * commands
    frame[:, ACTION_SLICE] = last_action
    frame[:, CLOCK_SLICE] = clock
    return frame


def observe(
    history: ObservationWindow,
    state: RobotState,
    commands: np.ndarray,
    last_action: np.ndarray,
    clock: np.ndarray,
    noise_rng: Optional[NoiseSource] = None,
    default_pose: Optional[np.ndarray] = None,
    config: ObservationConfig = ObservationConfig(),
    env_ids: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Push the current frame and return the flattened window, shape (N, 40 * 19).

    Args:
        history: Window maintained by the episode loop
        state: Current robot state
        commands: (N, 3) command triple (v_x, v_y, omega_z)
        last_action: (N, 4) previous policy action
        clock: (N, 2) sin/cos gait clock
        noise_rng: Generator, or one generator per environment; None disables noise
        default_pose: Joint positions are observed relative to this pose
        env_ids: Only these environments receive the new frame
    """
    pose = np.zeros(4) if default_pose is None else default_pose
    frame = build_frame(state, commands, last_action, clock, pose, config, noise_rng, env_ids)
    history.push(frame, env_ids)
    return history.flatten()
