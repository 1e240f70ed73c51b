"""Exception hierarchy for the compliant-foot lab."""

from typing import Optional

import numpy as np


class LabError(Exception):
    """Base class for every error raised by the lab."""


class ConfigParseError(LabError):
    """Configuration text could not be parsed."""

    def __init__(self, line: int, column: int, message: str):
        self.line = line
        self.column = column
        self.message = message
        super().__init__(f"line {line}, column {column}: {message}")


class ConfigValidationError(LabError):
    """Configuration parsed but failed schema validation."""

    def __init__(self, key: str, message: str):
        self.key = key
        self.message = message
        super().__init__(f"{key}: {message}")


class NumericalDivergence(LabError):
    """Raised when the integrator produces non-finite or out-of-bound state.

    Args:
        mask: Boolean array, True for every environment that diverged
        state: Batched state with diverged environments frozen at their last finite values
    """

    def __init__(self, mask: np.ndarray, state=None, message: Optional[str] = None):
        self.mask = np.asarray(mask, dtype=bool)
        self.state = state
        count = int(self.mask.sum())
        super().__init__(message or f"numerical divergence in {count} environment(s)")


class SingularMass(LabError):
    """Mass matrix is not positive definite (a model definition bug)."""


class EnvContractError(LabError):
    """Environment API used out of contract, e.g. stepping a finished episode."""


class NonFiniteLoss(LabError):
    """PPO loss or gradient became non-finite; the minibatch was dumped."""

    def __init__(self, dump_path: Optional[str], message: str = "non-finite loss"):
        self.dump_path = dump_path
        super().__init__(f"{message} (minibatch dumped to {dump_path})")


class InsufficientDistance(LabError):
    """Episode travelled less than the distance floor; energy per meter undefined."""

    def __init__(self, distance: float, floor: float):
        self.distance = distance
        self.floor = floor
        super().__init__(f"distance {distance:.4f} m is below the {floor} m floor")


class ChecksumMismatch(LabError):
    """Checkpoint parameter block does not match its stored digest."""


class CheckpointSchemaMismatch(LabError):
    """Checkpoint was written for a different network or observation layout."""
