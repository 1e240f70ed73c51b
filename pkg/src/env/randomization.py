"""Training-time domain randomization."""

import dataclasses
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from src.schemas import PhysicsConfig, RandomizationRanges


@dataclass(frozen=True)
class DomainRandomization:
    """One draw of randomized physical and control parameters for one environment."""

    added_base_mass: float
    friction: float
    restitution: float
    gravity_delta: float
    com_shift: float
    motor_strength: float
    motor_offset: Tuple[float, ...]
    kp_scale: float
    kd_scale: float
    resample_interval: float

    @classmethod
    def nominal(cls, physics: PhysicsConfig, resample_interval: float = float("inf")) -> "DomainRandomization":
        """Evaluation draw: no payload, identity scales, zero offsets."""
        return cls(
            added_base_mass=0.0,
            friction=physics.friction_coefficient,
            restitution=physics.restitution_surrogate,
            gravity_delta=0.0,
            com_shift=0.0,
            motor_strength=1.0,
            motor_offset=(0.0, 0.0, 0.0, 0.0),
            kp_scale=1.0,
            kd_scale=1.0,
            resample_interval=resample_interval,
        )

    def as_record(self) -> dict:
        """Flat mapping for episode logs."""
        record = dataclasses.asdict(self)
        offsets = record.pop("motor_offset")
        for index, value in enumerate(offsets):
            record[f"motor_offset_{index}"] = value
        return record


def sample_domain_randomization(
    rng: np.random.Generator,
    ranges: RandomizationRanges,
    num_joints: int = 4,
) -> DomainRandomization:
    """Draw every field uniformly within its range, in a fixed order."""
    def uniform(bounds: Tuple[float, float]) -> float:
        return float(rng.uniform(bounds[0], bounds[1]))

    return DomainRandomization(
        added_base_mass=uniform(ranges.added_base_mass),
        friction=uniform(ranges.friction),
        restitution=uniform(ranges.restitution),
        gravity_delta=uniform(ranges.gravity_delta),
        com_shift=uniform(ranges.com_shift),
        motor_strength=uniform(ranges.motor_strength),
        motor_offset=tuple(
            float(value)
            for value in rng.uniform(ranges.motor_offset[0], ranges.motor_offset[1], num_joints)
        ),
        kp_scale=uniform(ranges.kp_scale),
        kd_scale=uniform(ranges.kd_scale),
        resample_interval=uniform(ranges.resample_interval),
    )


def stack_field(draws: Sequence[DomainRandomization], name: str) -> np.ndarray:
    """Batch one field across environments."""
    return np.array([getattr(draw, name) for draw in draws], dtype=float)
