"""Mechanical energy per meter travelled."""

import logging
from abc import ABC, abstractmethod
from typing import Any, Dict, List

import numpy as np
import pandas as pd
from pydantic import BaseModel

from src.exceptions import InsufficientDistance

logger = logging.getLogger(__name__)

DEFAULT_DISTANCE_FLOOR = 0.5


class WorkConvention(ABC):
    """How joint power is turned into consumed energy."""

    @property
    @abstractmethod
    def name(self) -> str:
        """Return the convention identifier."""

    @abstractmethod
    def power(self, torques: np.ndarray, velocities: np.ndarray) -> np.ndarray:
        """Non-negative consumed power per sample and joint."""


class PositiveWork(WorkConvention):
    """Only positive mechanical power counts; no regeneration credit."""

    @property
    def name(self) -> str:
        return "positive"

    def power(self, torques: np.ndarray, velocities: np.ndarray) -> np.ndarray:
        return np.maximum(torques * velocities, 0.0)


class AbsoluteWork(WorkConvention):
    """Negative work costs as much as positive work."""

    @property
    def name(self) -> str:
        return "absolute"

    def power(self, torques: np.ndarray, velocities: np.ndarray) -> np.ndarray:
        return np.abs(torques * velocities)


WORK_CONVENTIONS = {
    'positive': PositiveWork,
    'absolute': AbsoluteWork,
}


def create_convention(name: str) -> WorkConvention:
    """Factory function for work conventions.

    Raises:
        ValueError: If the convention is unknown
    """
    if name not in WORK_CONVENTIONS:
        raise ValueError(
            f"Unknown energy convention: {name}. "
            f"Available conventions: {list(WORK_CONVENTIONS.keys())}"
        )
    return WORK_CONVENTIONS[name]()


def mechanical_work(
    torques: np.ndarray, velocities: np.ndarray, dt: float, convention: str = "positive"
) -> float:
    """Work integrated over time and summed over joints (the last axis)."""
    torques = np.asarray(torques, dtype=float)
    velocities = np.asarray(velocities, dtype=float)
    if torques.shape != velocities.shape:
        raise ValueError(f"torque trace {torques.shape} and velocity trace {velocities.shape} differ")
    return float(np.sum(create_convention(convention).power(torques, velocities)) * dt)


def energy_per_meter(
    torques: np.ndarray,
    velocities: np.ndarray,
    dt: float,
    distance: float,
    convention: str = "positive",
    distance_floor: float = DEFAULT_DISTANCE_FLOOR,
) -> float:
    """Consumed mechanical energy divided by distance travelled.

    Args:
        torques: (steps, joints) torque trace
        velocities: (steps, joints) joint velocity trace aligned with ``torques``
        dt: Sample period in seconds
        distance: Net forward distance in meters
        convention: "positive" or "absolute"
        distance_floor: Minimum distance for a defined result

    Returns:
        Energy per meter in J/m

    Raises:
        InsufficientDistance: distance is not above ``distance_floor``
    """
    if not distance > distance_floor:
        raise InsufficientDistance(float(distance), distance_floor)
    return mechanical_work(torques, velocities, dt, convention) / distance


class EnergyRecord(BaseModel):
    """Outcome of one evaluation episode."""

    episode_id: int
    stiffness_id: str
    policy_id: str
    seed: int
    work_j: float
    abs_work_j: float
    distance_m: float
    energy_per_meter: float
    abs_energy_per_meter: float
    fell: bool
    fault: bool = False
    discarded: bool = False
    mean_speed: float

    @property
    def usable(self) -> bool:
        return not (self.fell or self.fault or self.discarded)


def records_frame(records: List[EnergyRecord]) -> pd.DataFrame:
    return pd.DataFrame([record.model_dump() for record in records])


def summarize(values: List[float]) -> Dict[str, Any]:
    """Mean, population std and count; std is 0 for a single value."""
    if not values:
        return {"mean": float("nan"), "std": float("nan"), "n": 0}
    array = np.asarray(values, dtype=float)
    return {"mean": float(array.mean()), "std": float(array.std()), "n": int(array.size)}
