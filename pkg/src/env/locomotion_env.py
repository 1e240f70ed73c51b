"""Batched planar locomotion environment.

One instance owns ``num_envs`` independent episodes that are stepped together with
numpy. Each episode has its own seeded generator for resets, randomization, commands
and sensor noise, so an episode's random stream does not depend on its batch slot.
"""

import logging
from enum import IntEnum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.control.actuation import ActionCommand, PdGains, action_to_target, pd_torque
from src.env.gait import clock_signals, gait_clock
from src.env.observation import ObservationWindow, observe
from src.env.randomization import (
    DomainRandomization,
    sample_domain_randomization,
    stack_field,
)
from src.env.rewards import RewardBreakdown, RewardContext, compute_reward
from src.exceptions import EnvContractError, NumericalDivergence
from src.physics.robot import ACTUATED, RobotModel, RobotState
from src.physics.simulator import WorldParams, refresh_contact, step
from src.schemas import EnvConfig, RunConfig, SpringFootParams

logger = logging.getLogger(__name__)

ENV_MODES = ("train", "eval")


class Termination(IntEnum):
    RUNNING = 0
    FELL = 1
    TIMEOUT = 2
    FAULT = 3


def check_termination(
    state: RobotState,
    time: np.ndarray,
    config: EnvConfig = EnvConfig(),
    grace_period: float = 0.0,
    episode_length: Optional[float] = None,
) -> np.ndarray:
    """Classify every environment as running, fell or timeout.

    Fall checks start after ``grace_period``; the timeout boundary is closed.
    Faults come from the integrator and are assigned by the caller.
    """
    time = np.asarray(time, dtype=float)
    limit = config.episode_length_s if episode_length is None else episode_length
    fell = (np.abs(state.pitch) > config.fall_pitch) | (state.base_z < config.min_base_height)
    fell &= time >= grace_period
    timeout = time >= limit - 1e-9
    status = np.where(timeout, Termination.TIMEOUT, Termination.RUNNING)
    return np.where(fell, Termination.FELL, status).astype(int)


class LocomotionEnv:
    """Observation window, PD actuation, rewards and termination over batched physics."""

    action_dim = 4

    def __init__(
        self,
        config: RunConfig,
        spring: SpringFootParams,
        num_envs: int,
        seed: int = 0,
        mode: str = "train",
        episode_length_s: Optional[float] = None,
        env_seeds: Optional[Sequence[Any]] = None,
        v_x_cmd: Optional[float] = None,
    ):
        """Initialize the environment batch.

        Args:
            config: Run configuration
            spring: Foot spring the robot is built with
            num_envs: Number of parallel episodes
            seed: Root seed, spawned into one stream per episode
            mode: "train" randomizes and samples commands, "eval" is nominal
            episode_length_s: Overrides the configured episode length
            env_seeds: Explicit per-episode seeds, overriding ``seed``
            v_x_cmd: Fixed command in eval mode (defaults to the configured one)
        """
        if mode not in ENV_MODES:
            raise ValueError(f"Invalid mode: {mode}. Available modes: {list(ENV_MODES)}")

        self.config = config
        self.env_cfg = config.env
        self.physics = config.physics
        self.actuation = config.actuation
        self.spring = spring
        self.mode = mode
        self.num_envs = num_envs
        self.episode_length_s = episode_length_s or self.env_cfg.episode_length_s
        self.grace_period = self.env_cfg.grace_period_s if mode == "eval" else 0.0
        self.policy_dt = self.physics.dt * self.actuation.decimation
        self.eval_command = self.env_cfg.commands.v_x_cmd if v_x_cmd is None else v_x_cmd

        if env_seeds is None:
            streams = np.random.SeedSequence(seed).spawn(num_envs)
        else:
            if len(env_seeds) != num_envs:
                raise ValueError(f"expected {num_envs} env seeds, got {len(env_seeds)}")
            streams = list(env_seeds)
        self.rngs = [np.random.default_rng(stream) for stream in streams]

        self.base_model = RobotModel.from_config(config.model, spring)
        self.base_gains = PdGains.from_config(self.actuation)
        self.window = ObservationWindow(num_envs, self.env_cfg.observation.history_length)

        self.state = RobotState.standing(self.base_model, num_envs)
        self.step_count = np.zeros(num_envs, dtype=int)
        self.done = np.ones(num_envs, dtype=bool)
        self.last_action = np.zeros((num_envs, self.action_dim))
        self.prev_action = np.zeros((num_envs, self.action_dim))
        self.prev_joint_qd = np.zeros((num_envs, self.action_dim))
        self.v_x_cmd = np.full(num_envs, self.eval_command)
        self.next_resample = np.full(num_envs, np.inf)
        self.randomization: List[DomainRandomization] = [
            DomainRandomization.nominal(self.physics) for _ in range(num_envs)
        ]
        self.command: Optional[ActionCommand] = None
        self._apply_randomization()

    @property
    def obs_dim(self) -> int:
        return self.window.size

    @property
    def time(self) -> np.ndarray:
        return self.step_count * self.policy_dt

    # Randomization
    def _draw(self, env_id: int) -> None:
        rng = self.rngs[env_id]
        draw = sample_domain_randomization(rng, self.env_cfg.randomization)
        low, high = self.env_cfg.commands.train_v_x_range
        self.v_x_cmd[env_id] = rng.uniform(low, high)
        self.randomization[env_id] = draw
        self.next_resample[env_id] = self.time[env_id] + draw.resample_interval

    def _apply_randomization(self) -> None:
        draws = self.randomization
        self.model = self.base_model.with_payload(
            stack_field(draws, "added_base_mass"), stack_field(draws, "com_shift")
        )
        gravity = np.tile(np.asarray(self.physics.gravity, dtype=float), (self.num_envs, 1))
        gravity[:, 1] += stack_field(draws, "gravity_delta")
        self.world = WorldParams(
            friction=stack_field(draws, "friction"),
            restitution=stack_field(draws, "restitution"),
            gravity=gravity,
        )
        self.gains = self.base_gains.randomized(
            kp_scale=stack_field(draws, "kp_scale")[:, None],
            kd_scale=stack_field(draws, "kd_scale")[:, None],
            motor_strength_scale=stack_field(draws, "motor_strength")[:, None],
            motor_offset=np.array([draw.motor_offset for draw in draws], dtype=float),
        )

    def _commands(self) -> np.ndarray:
        commands = np.zeros((self.num_envs, 3))
        commands[:, 0] = self.v_x_cmd
        return commands

    def _observe(self, env_ids: Optional[np.ndarray] = None) -> np.ndarray:
        return observe(
            self.window,
            self.state,
            self._commands(),
            self.last_action,
            clock_signals(self.time, self.env_cfg.commands),
            noise_rng=self.rngs,
            default_pose=self.base_model.default_pose,
            config=self.env_cfg.observation,
            env_ids=env_ids,
        )

    # Episode API
    def reset(self, env_ids: Optional[Sequence[int]] = None) -> np.ndarray:
        """Start new episodes and return the observation of the whole batch.

        Args:
            env_ids: Episodes to restart; all when None

        Returns:
            (num_envs, obs_dim) observation
        """
        ids = np.arange(self.num_envs) if env_ids is None else np.asarray(env_ids, dtype=int)
        if ids.size == 0:
            return self.window.flatten()

        joint_q = np.tile(self.base_model.default_pose, (self.num_envs, 1))
        noise = self.env_cfg.init_joint_noise
        for env_id in ids:
            joint_q[env_id] += self.rngs[env_id].uniform(-noise, noise, self.action_dim)
            if self.mode == "train":
                self._draw(env_id)
            else:
                self.randomization[env_id] = DomainRandomization.nominal(self.physics)
                self.v_x_cmd[env_id] = self.eval_command
        self._apply_randomization()

        fresh = RobotState.standing(self.base_model, self.num_envs, joint_q=joint_q)
        mask = np.zeros(self.num_envs, dtype=bool)
        mask[ids] = True
        self.state = refresh_contact(fresh.select(mask, self.state), self.physics, self.model, self.world)

        self.step_count[ids] = 0
        self.done[ids] = False
        self.last_action[ids] = 0.0
        self.prev_action[ids] = 0.0
        self.prev_joint_qd[ids] = 0.0
        if self.mode == "train":
            self.next_resample[ids] = np.array([self.randomization[i].resample_interval for i in ids])
        self.window.reset(ids)
        return self._observe(ids)

    def step(
        self,
        actions: np.ndarray,
        active: Optional[np.ndarray] = None,
    ) -> Tuple[np.ndarray, RewardBreakdown, np.ndarray, Dict[str, Any]]:
        """Apply one policy action per episode and advance ``decimation`` physics steps.

        Args:
            actions: (num_envs, 4) raw policy actions
            active: Episodes to advance; the rest are left untouched

        Returns:
            (observation, reward breakdown, done flags, info)

        Raises:
            EnvContractError: An active episode has already finished
        """
        active = np.ones(self.num_envs, dtype=bool) if active is None else np.asarray(active, dtype=bool)
        if (self.done & active).any():
            raise EnvContractError(
                f"step() on finished episodes {np.flatnonzero(self.done & active).tolist()}; "
                f"call reset() first"
            )

        clip = self.actuation.action_clip
        raw = np.clip(np.asarray(actions, dtype=float), -clip, clip)
        target = action_to_target(
            raw,
            self.base_model.default_pose,
            self.actuation.action_scale,
            clip=clip,
            motor_offset=self.gains.motor_offset,
            joint_limits=self.base_model.joint_limits,
        )
        self.command = ActionCommand(raw_action=raw, target_q=target)

        decimation = self.actuation.decimation
        torque_trace = np.zeros((self.num_envs, decimation, self.action_dim))
        velocity_trace = np.zeros((self.num_envs, decimation, self.action_dim))
        fault = np.zeros(self.num_envs, dtype=bool)
        prev_state = self.state
        state = self.state

        for k in range(decimation):
            torque = pd_torque(target, state.joint_q, state.joint_qd, self.gains, self.base_model.torque_limit)
            torque = np.where(active[:, None], torque, 0.0)
            try:
                advanced = step(state, torque, self.physics, self.model, self.world)
            except NumericalDivergence as e:
                fault |= e.mask & active
                advanced = e.state
            advanced = advanced.select(active & ~fault, state)
            torque_trace[:, k] = np.where((active & ~fault)[:, None], torque, 0.0)
            velocity_trace[:, k] = (advanced.joint_q - state.joint_q) / self.physics.dt
            state = advanced

        self.state = state
        self.step_count[active] += 1
        time = self.time

        schedule = gait_clock(time, self.env_cfg.commands)
        context = RewardContext.from_states(
            state,
            prev_state,
            self.model,
            self.env_cfg.commands,
            self.v_x_cmd,
            raw,
            self.last_action,
            self.prev_action,
            np.mean(torque_trace, axis=1),
            schedule,
            self.policy_dt,
        )
        reward = compute_reward(context, self.env_cfg.weights, self.env_cfg.sigmas)
        nonfinite = active & ~reward.is_finite()
        if nonfinite.any():
            logger.warning(f"Non-finite reward in environments {np.flatnonzero(nonfinite).tolist()}")
            fault |= nonfinite
        if fault.any():
            logger.warning(f"Environment fault in {np.flatnonzero(fault).tolist()}; aborting those episodes")

        termination = check_termination(
            state, time, self.env_cfg, grace_period=self.grace_period, episode_length=self.episode_length_s
        )
        termination[fault] = Termination.FAULT
        done = active & (termination != Termination.RUNNING)

        reward = RewardBreakdown(
            terms={name: np.where(active & ~fault, value, 0.0) for name, value in reward.terms.items()},
            weights=reward.weights,
            total=np.where(active & ~fault, reward.total, 0.0),
        )

        rows = active & ~done
        self.prev_action[active] = self.last_action[active]
        self.last_action[active] = raw[active]
        self.prev_joint_qd[active] = state.joint_qd[active]

        if self.mode == "train":
            due = np.flatnonzero(rows & (time >= self.next_resample))
            for env_id in due:
                self._draw(env_id)
            if due.size:
                self._apply_randomization()

        distance = np.where(active, state.base_x - prev_state.base_x, 0.0)
        observation = self._observe(np.flatnonzero(active))
        self.done |= done

        info = {
            "torques": torque_trace,
            "joint_velocity": velocity_trace,
            "distance": distance,
            "termination": termination,
            "fault": fault,
            "time": time,
            "schedule": schedule,
            "v_x_cmd": self.v_x_cmd.copy(),
        }
        return observation, reward, done, info
