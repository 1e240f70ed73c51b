"""Shared fixtures for the test-suite."""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.physics.robot import RobotModel  # noqa: E402
from src.schemas import RobotModelConfig, RunConfig, SpringFootParams  # noqa: E402


@pytest.fixture
def s5_spring():
    """Intermediate ladder spring."""
    return SpringFootParams.from_ladder("S5")


@pytest.fixture
def model(s5_spring):
    """Default planar robot on the S5 foot."""
    return RobotModel.from_config(RobotModelConfig(), s5_spring)


@pytest.fixture
def bare_model(s5_spring):
    """Default robot without actuator armature."""
    return RobotModel.from_config(RobotModelConfig(armature=0.0), s5_spring)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_config():
    """Run configuration shrunk for fast environment and learner tests."""
    return RunConfig.model_validate(
        {
            "env": {"episode_length_s": 1.0, "grace_period_s": 0.2, "observation": {"history_length": 3}},
            "learner": {
                "num_envs": 4,
                "steps_per_iteration": 8,
                "hidden_sizes": [16, 16],
                "minibatches": 2,
                "epochs": 2,
                "iterations": 2,
                "checkpoint_interval": 1,
            },
            "sweep": {
                "stiffness": ["S1", "S5"],
                "episodes_per_cell": 2,
                "episode_length_s": 1.0,
                "distance_floor": 0.01,
            },
        }
    )


@pytest.fixture
def make_matrix():
    """Build a CrossEvalMatrix from {(spring_id, policy_id): mean_j_per_m} on the ladder."""
    import pandas as pd

    from src.evalsuite.cross_eval import MATRIX_COLUMNS, CrossEvalMatrix
    from src.schemas import STIFFNESS_LADDER

    def build(values, note=""):
        rows = []
        for (spring_id, policy_id), value in values.items():
            rows.append(
                {
                    "spring_id": spring_id,
                    "stiffness_n_per_m": STIFFNESS_LADDER[spring_id],
                    "policy_id": policy_id,
                    "mean_j_per_m": value,
                    "std_j_per_m": 1.0,
                    "n": 10,
                    "fall_rate": 0.0,
                    "mean_speed": 0.5,
                    "policy_stiffness_n_per_m": STIFFNESS_LADDER[policy_id.removeprefix("pi_")],
                    "mean_abs_j_per_m": value * 1.5,
                    "discarded": 0,
                    "note": note,
                }
            )
        return CrossEvalMatrix(pd.DataFrame(rows, columns=MATRIX_COLUMNS))

    return build
