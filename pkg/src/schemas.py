"""Pydantic schemas for the run configuration.

Every section is frozen after validation and rejects unknown keys. Defaults mirror the
training tables (reward weights, PD gains, randomization ranges, stiffness ladder) plus
the declared modelling defaults of the planar robot.
"""

import math
from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

# Foot spring ladder in N/m, one entry per trained policy.
STIFFNESS_LADDER: Dict[str, float] = {
    "S1": 1000.0,
    "S2": 2000.0,
    "S3": 5500.0,
    "S4": 9500.0,
    "S5": 14500.0,
    "S6": 22000.0,
    "S7": 40000.0,
    "S8": 60000.0,
}


class LabModel(BaseModel):
    """Base for all configuration sections."""

    model_config = ConfigDict(extra="forbid", frozen=True)


def _ordered_range(value: Tuple[float, float]) -> Tuple[float, float]:
    low, high = value
    if low > high:
        raise ValueError(f"range lower bound {low} exceeds upper bound {high}")
    return value


# Physics
class PhysicsConfig(LabModel):
    """Integrator and ground-contact parameters."""

    dt: float = Field(0.005, gt=0)
    gravity: Tuple[float, float] = (0.0, -9.81)
    ground_normal_stiffness: float = Field(5.0e4, gt=0)
    ground_normal_damping: float = Field(500.0, ge=0)
    friction_coefficient: float = Field(1.0, ge=0)
    restitution_surrogate: float = Field(0.0, ge=0, le=1)
    friction_regularization_velocity: float = Field(0.01, gt=0)
    substeps: int = Field(10, ge=1)
    divergence_bound: float = Field(1.0e3, gt=0)


class FootConfig(LabModel):
    """Geometry and mass of the passive foot slider, shared by every stiffness."""

    free_length: float = Field(0.02, gt=0)
    max_travel: float = Field(0.04, gt=0)
    hard_stop_stiffness: float = Field(1.0e5, gt=0)
    foot_mass: float = Field(0.1, gt=0)
    damping_ratio: float = Field(0.1, ge=0)
    damping: Optional[float] = Field(None, ge=0)

    def spring(self, stiffness: float, stiffness_id: str = "custom") -> "SpringFootParams":
        """Build the spring parameters for one stiffness setting."""
        damping = self.damping
        if damping is None:
            damping = 2.0 * self.damping_ratio * math.sqrt(stiffness * self.foot_mass)
        return SpringFootParams(
            stiffness=stiffness,
            damping=damping,
            free_length=self.free_length,
            max_travel=self.max_travel,
            hard_stop_stiffness=self.hard_stop_stiffness,
            foot_mass=self.foot_mass,
            stiffness_id=stiffness_id,
        )


class SpringFootParams(LabModel):
    """Stiffness, damping and travel of one passive prismatic foot."""

    stiffness: float = Field(gt=0)
    damping: float = Field(0.0, ge=0)
    free_length: float = Field(0.02, gt=0)
    max_travel: float = Field(0.04, gt=0)
    hard_stop_stiffness: float = Field(1.0e5, gt=0)
    foot_mass: float = Field(0.1, gt=0)
    stiffness_id: str = "custom"

    @classmethod
    def from_ladder(cls, stiffness_id: str, foot: Optional[FootConfig] = None) -> "SpringFootParams":
        """Spring for a ladder id such as ``"S5"``.

        Raises:
            ValueError: If the id is not on the ladder
        """
        if stiffness_id not in STIFFNESS_LADDER:
            raise ValueError(
                f"Unknown stiffness id: {stiffness_id}. "
                f"Available ids: {list(STIFFNESS_LADDER.keys())}"
            )
        return (foot or FootConfig()).spring(STIFFNESS_LADDER[stiffness_id], stiffness_id)


# Robot model
class LegConfig(LabModel):
    """One sagittal leg: thigh and shank rods hung from a hip on the torso axis."""

    thigh_length: float = Field(0.2, gt=0)
    shank_length: float = Field(0.2, gt=0)
    thigh_mass: float = Field(0.5, gt=0)
    shank_mass: float = Field(0.5, gt=0)
    hip_offset_x: float


class RobotModelConfig(LabModel):
    """Planar quadruped: torso plus front and rear hip-knee legs with sliding feet."""

    torso_mass: float = Field(10.0, gt=0)
    torso_inertia: float = Field(0.3, gt=0)
    torso_length: float = Field(0.6, gt=0)
    front: LegConfig = Field(default_factory=lambda: LegConfig(hip_offset_x=0.25))
    rear: LegConfig = Field(default_factory=lambda: LegConfig(hip_offset_x=-0.25))
    hip_limits: Tuple[float, float] = (-1.2, 1.2)
    knee_limits: Tuple[float, float] = (-2.4, -0.3)
    torque_limit: float = Field(30.0, gt=0)
    armature: float = Field(0.01, ge=0)
    default_hip: float = 0.7
    default_knee: float = -1.4

    @field_validator("hip_limits", "knee_limits")
    @classmethod
    def _limits_ordered(cls, value: Tuple[float, float]) -> Tuple[float, float]:
        if value[0] >= value[1]:
            raise ValueError(f"joint limit lower bound {value[0]} must be below {value[1]}")
        return value


# Actuation
class ActuationConfig(LabModel):
    """PD tracking gains and the action-to-target mapping."""

    kp: float = Field(80.0, gt=0)
    kd: float = Field(2.5, ge=0)
    action_scale: float = Field(0.25, gt=0)
    action_clip: float = Field(3.0, gt=0)
    decimation: int = Field(4, ge=1)


# Environment
class CommandState(LabModel):
    """Commanded motion and gait timing."""

    v_x_cmd: float = 0.5
    v_y_cmd: float = 0.0
    omega_z_cmd: float = 0.0
    h_z_cmd: float = Field(0.32, gt=0)
    pitch_cmd: float = 0.0
    swing_height_cmd: float = Field(0.08, ge=0)
    gait_period: float = Field(0.5, gt=0)
    duty_factor: float = Field(0.5, gt=0, lt=1)
    phase_offsets: Tuple[float, float] = (0.0, 0.5)
    clock_sharpness: float = Field(50.0, gt=0)
    raibert_gain: float = 0.0
    train_v_x_range: Tuple[float, float] = (0.2, 0.8)

    @field_validator("v_y_cmd", "omega_z_cmd")
    @classmethod
    def _planar_only(cls, value: float) -> float:
        if value != 0.0:
            raise ValueError("lateral and yaw commands must be 0 for the planar model")
        return value

    @field_validator("train_v_x_range")
    @classmethod
    def _train_range(cls, value: Tuple[float, float]) -> Tuple[float, float]:
        return _ordered_range(value)


class RewardSigmas(LabModel):
    """Widths of the exponential tracking kernels."""

    lin_vel: float = Field(0.25, gt=0)
    ang_vel: float = Field(0.25, gt=0)
    contact_force: float = Field(100.0, gt=0)
    contact_velocity: float = Field(0.25, gt=0)


class RewardWeights(LabModel):
    """Weight per reward row; auxiliary rows are penalties on non-negative magnitudes."""

    tracking_lin_vel: float = 1.0
    tracking_ang_vel: float = 0.5
    swing_force: float = -4.0
    stance_slip: float = -4.0
    body_height: float = -30.0
    orientation: float = -5.0
    raibert: float = -10.0
    swing_height: float = -30.0
    lin_vel_z: float = -0.02
    ang_vel_xy: float = -0.001
    foot_slip: float = -0.04
    collision: float = -0.02
    joint_limit: float = -10.0
    torques: float = -3.0e-6
    joint_vel: float = -1.0e-4
    joint_acc: float = -2.5e-7
    action_rate: float = -0.1
    action_smoothness: float = -0.1


class RandomizationRanges(LabModel):
    """Uniform sampling ranges for training-time domain randomization."""

    added_base_mass: Tuple[float, float] = (0.0, 3.0)
    friction: Tuple[float, float] = (0.1, 3.0)
    restitution: Tuple[float, float] = (0.0, 0.4)
    gravity_delta: Tuple[float, float] = (-1.0, 1.0)
    com_shift: Tuple[float, float] = (-0.02, 0.02)
    motor_strength: Tuple[float, float] = (0.9, 1.1)
    motor_offset: Tuple[float, float] = (-0.02, 0.02)
    kp_scale: Tuple[float, float] = (0.8, 1.3)
    kd_scale: Tuple[float, float] = (0.5, 1.5)
    resample_interval: Tuple[float, float] = (6.0, 8.0)

    @field_validator("*")
    @classmethod
    def _ranges_ordered(cls, value: Tuple[float, float]) -> Tuple[float, float]:
        return _ordered_range(value)


class ObservationConfig(LabModel):
    """History length, scaling and sensor noise of the proprioceptive window."""

    history_length: int = Field(40, ge=1)
    noise_q: float = Field(0.01, ge=0)
    noise_qd: float = Field(0.05, ge=0)
    noise_gravity: float = Field(0.02, ge=0)
    qd_scale: float = Field(0.05, gt=0)
    command_scale: float = Field(2.0, gt=0)
    add_noise: bool = True


class EnvConfig(LabModel):
    """Episode rules, commands, reward shaping and randomization."""

    commands: CommandState = Field(default_factory=CommandState)
    sigmas: RewardSigmas = Field(default_factory=RewardSigmas)
    weights: RewardWeights = Field(default_factory=RewardWeights)
    randomization: RandomizationRanges = Field(default_factory=RandomizationRanges)
    observation: ObservationConfig = Field(default_factory=ObservationConfig)
    episode_length_s: float = Field(20.0, gt=0)
    grace_period_s: float = Field(4.0, ge=0)
    fall_pitch: float = Field(1.0, gt=0)
    min_base_height: float = Field(0.15, gt=0)
    init_joint_noise: float = Field(0.05, ge=0)


# Learner
class PpoConfig(LabModel):
    """PPO, network and optimizer hyperparameters."""

    gamma: float = Field(0.99, gt=0, le=1)
    gae_lambda: float = Field(0.95, gt=0, le=1)
    clip: float = Field(0.2, gt=0)
    epochs: int = Field(5, ge=1)
    minibatches: int = Field(4, ge=1)
    learning_rate: float = Field(3.0e-4, gt=0)
    adam_betas: Tuple[float, float] = (0.9, 0.999)
    adam_eps: float = Field(1.0e-8, gt=0)
    entropy_coef: float = Field(0.01, ge=0)
    value_coef: float = Field(0.5, ge=0)
    max_grad_norm: float = Field(1.0, gt=0)
    steps_per_iteration: int = Field(64, ge=1)
    num_envs: int = Field(64, ge=1)
    hidden_sizes: Tuple[int, ...] = (256, 128)
    init_log_std: float = -1.0
    log_std_bounds: Tuple[float, float] = (-4.0, 1.0)
    iterations: int = Field(1500, ge=1)
    checkpoint_interval: int = Field(50, ge=1)
    dtype: Literal["float64", "float32"] = "float64"


# Sweep
class StiffnessEntry(LabModel):
    """A spring setting: a ladder id, optionally with an explicit value."""

    id: str
    n_per_m: float = Field(gt=0)

    @model_validator(mode="before")
    @classmethod
    def _resolve_ladder(cls, data: Any) -> Any:
        if isinstance(data, str):
            data = {"id": data}
        if isinstance(data, dict) and data.get("n_per_m") is None:
            stiffness_id = data.get("id")
            if stiffness_id not in STIFFNESS_LADDER:
                raise ValueError(
                    f"stiffness id {stiffness_id!r} is not on the S1-S8 ladder; "
                    f"give an explicit n_per_m"
                )
            data = {**data, "n_per_m": STIFFNESS_LADDER[stiffness_id]}
        return data


def _full_ladder() -> List[StiffnessEntry]:
    return [StiffnessEntry(id=key, n_per_m=value) for key, value in STIFFNESS_LADDER.items()]


class SweepConfig(LabModel):
    """Stiffness list and evaluation protocol of the cross-evaluation."""

    stiffness: List[StiffnessEntry] = Field(default_factory=_full_ladder, min_length=1)
    episodes_per_cell: int = Field(10, ge=1)
    episode_length_s: float = Field(15.0, gt=0)
    eval_v_x_cmd: float = 0.5
    seeds: List[int] = Field(default_factory=lambda: [0, 1, 2], min_length=1)
    base_seed: int = 0
    energy_convention: Literal["positive", "absolute"] = "positive"
    distance_floor: float = Field(0.5, gt=0)

    def entry(self, stiffness_id: str) -> StiffnessEntry:
        """Look up a configured stiffness, falling back to the ladder."""
        for entry in self.stiffness:
            if entry.id == stiffness_id:
                return entry
        return StiffnessEntry.model_validate(stiffness_id)


class RunConfig(LabModel):
    """Complete machine-readable configuration of a run."""

    model: RobotModelConfig = Field(default_factory=RobotModelConfig)
    physics: PhysicsConfig = Field(default_factory=PhysicsConfig)
    foot: FootConfig = Field(default_factory=FootConfig)
    actuation: ActuationConfig = Field(default_factory=ActuationConfig)
    env: EnvConfig = Field(default_factory=EnvConfig)
    learner: PpoConfig = Field(default_factory=PpoConfig)
    sweep: SweepConfig = Field(default_factory=SweepConfig)
    output_dir: str = "runs"
    run_id: str = "default"

    def spring(self, stiffness_id: str) -> SpringFootParams:
        """Spring parameters for a stiffness id known to this run."""
        entry = self.sweep.entry(stiffness_id)
        return self.foot.spring(entry.n_per_m, entry.id)
