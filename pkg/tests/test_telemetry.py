"""Tests for per-step episode telemetry."""

import numpy as np
import pandas as pd

from src.env.locomotion_env import LocomotionEnv
from src.env.telemetry import ATTITUDE_COLUMNS, TelemetryRecorder


def test_recorder_tracks_one_env(tmp_path, small_config, s5_spring):
    env = LocomotionEnv(small_config, s5_spring, num_envs=2, mode="eval")
    env.reset()
    recorder = TelemetryRecorder(env_index=1)
    for _ in range(3):
        _, reward, _, info = env.step(np.zeros((2, 4)))
        recorder.record(env, reward, info)

    frame = recorder.to_frame()
    assert len(frame) == 3
    np.testing.assert_allclose(frame["time"], env.policy_dt * np.arange(1, 4))
    assert frame["pitch"].iloc[-1] == env.state.pitch[1]
    assert (frame["roll"] == 0.0).all() and (frame["yaw"] == 0.0).all()
    assert set(ATTITUDE_COLUMNS) <= set(frame.columns)
    assert "reward_tracking_lin_vel" in frame.columns

    path = recorder.to_csv(tmp_path / "telemetry.csv")
    assert len(pd.read_csv(path)) == 3
