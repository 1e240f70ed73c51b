"""Per-step episode telemetry for the joint-trajectory and attitude plots."""

import logging
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np
import pandas as pd

from src.env.rewards import RewardBreakdown

logger = logging.getLogger(__name__)

JOINT_COLUMNS = {
    "hip": ("hip_front", "hip_rear"),
    "knee": ("knee_front", "knee_rear"),
    "slider": ("slider_front", "slider_rear"),
}
ATTITUDE_COLUMNS = ("roll", "pitch", "yaw")
TELEMETRY_FLOAT_FORMAT = "%.10g"


class TelemetryRecorder:
    """Collects one row per control step for a single environment of a batch."""

    def __init__(self, env_index: int = 0):
        self.env_index = env_index
        self.rows: List[Dict[str, Any]] = []

    def record(self, env, reward: RewardBreakdown, info: Dict[str, Any]) -> None:
        """Append the state reached by the last ``env.step`` call."""
        i = self.env_index
        state = env.state
        row: Dict[str, Any] = {
            "time": float(info["time"][i]),
            "base_x": float(state.base_x[i]),
            "base_z": float(state.base_z[i]),
            "roll": 0.0,
            "pitch": float(state.pitch[i]),
            "yaw": 0.0,
        }
        names = ("hip_front", "knee_front", "hip_rear", "knee_rear")
        for j, name in enumerate(names):
            row[f"{name}_q"] = float(state.joint_q[i, j])
            row[f"{name}_qd"] = float(state.joint_qd[i, j])
            row[f"{name}_torque"] = float(np.mean(info["torques"][i, :, j]))
        for leg, name in enumerate(("slider_front", "slider_rear")):
            row[f"{name}_q"] = float(state.slider[i, leg])
            row[f"{name}_qd"] = float(state.slider_rate[i, leg])
        for leg, name in enumerate(("front", "rear")):
            row[f"schedule_{name}"] = float(info["schedule"][i, leg])
            row[f"in_contact_{name}"] = int(state.contact.in_contact[i, leg])
            row[f"normal_force_{name}"] = float(state.contact.normal_force[i, leg])
        row["reward_total"] = float(reward.total[i])
        for name, value in reward.weighted().items():
            row[f"reward_{name}"] = float(value[i])
        self.rows.append(row)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows)

    def to_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format=TELEMETRY_FLOAT_FORMAT)
        logger.info(f"Wrote {len(self.rows)} telemetry rows to {path}")
        return path
