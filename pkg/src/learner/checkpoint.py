"""Binary policy checkpoints.

Layout (little endian)::

    magic          8 bytes   b"CFLABCKP"
    version        uint32
    arch_len       uint32
    arch_json      arch_len bytes, UTF-8
    arch_digest    32 bytes, SHA-256 of arch_json
    stiffness_id   16 bytes, NUL padded ASCII
    stiffness      float64, N/m
    seed           int64
    iteration      int64
    param_count    uint64
    param_digest   32 bytes, SHA-256 of the parameter block
    params         param_count x float64
"""

import hashlib
import logging
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from src.exceptions import CheckpointSchemaMismatch, ChecksumMismatch
from src.learner.network import NetworkSpec, PolicyNetwork

logger = logging.getLogger(__name__)

MAGIC = b"CFLABCKP"
CHECKPOINT_VERSION = 1
_PREFIX = struct.Struct("<8sII")
_TRAILER = struct.Struct("<32s16sdqqQ32s")


@dataclass
class Checkpoint:
    network: PolicyNetwork
    stiffness_id: str
    stiffness: float
    seed: int
    iteration: int
    path: Optional[Path] = None

    @property
    def policy_id(self) -> str:
        return f"pi_{self.stiffness_id}_seed{self.seed}"


def save_checkpoint(
    path: Union[str, Path],
    network: PolicyNetwork,
    stiffness_id: str,
    stiffness: float,
    seed: int,
    iteration: int,
) -> Path:
    """Write a checkpoint atomically (temp file, then rename)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    arch = network.spec.to_json().encode("utf-8")
    block = np.ascontiguousarray(network.params, dtype="<f8").tobytes()
    payload = (
        _PREFIX.pack(MAGIC, CHECKPOINT_VERSION, len(arch))
        + arch
        + _TRAILER.pack(
            hashlib.sha256(arch).digest(),
            stiffness_id.encode("ascii")[:16],
            float(stiffness),
            int(seed),
            int(iteration),
            network.param_count,
            hashlib.sha256(block).digest(),
        )
        + block
    )
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(payload)
    tmp.replace(path)
    logger.debug(f"Saved checkpoint {path} (iteration {iteration})")
    return path


def load_checkpoint(path: Union[str, Path], expected_obs_dim: Optional[int] = None) -> Checkpoint:
    """Read and verify a checkpoint.

    Args:
        path: Checkpoint file
        expected_obs_dim: Observation size the caller will feed; checked when given

    Raises:
        ChecksumMismatch: Truncated file or a digest does not match
        CheckpointSchemaMismatch: Wrong magic, version or observation layout
    """
    path = Path(path)
    data = path.read_bytes()
    if len(data) < _PREFIX.size:
        raise ChecksumMismatch(f"{path}: truncated header")
    magic, version, arch_len = _PREFIX.unpack_from(data, 0)
    if magic != MAGIC:
        raise CheckpointSchemaMismatch(f"{path}: not a checkpoint file")
    if version != CHECKPOINT_VERSION:
        raise CheckpointSchemaMismatch(f"{path}: format version {version}, expected {CHECKPOINT_VERSION}")

    offset = _PREFIX.size
    arch = data[offset : offset + arch_len]
    offset += arch_len
    if len(data) < offset + _TRAILER.size:
        raise ChecksumMismatch(f"{path}: truncated header")
    arch_digest, raw_id, stiffness, seed, iteration, count, param_digest = _TRAILER.unpack_from(data, offset)
    offset += _TRAILER.size
    if hashlib.sha256(arch).digest() != arch_digest:
        raise ChecksumMismatch(f"{path}: architecture digest mismatch")

    block = data[offset:]
    if len(block) != 8 * count or hashlib.sha256(block).digest() != param_digest:
        raise ChecksumMismatch(f"{path}: parameter block digest mismatch")

    try:
        spec = NetworkSpec.from_json(arch.decode("utf-8"))
    except (ValueError, KeyError) as e:
        raise CheckpointSchemaMismatch(f"{path}: unreadable architecture: {e}") from e
    if spec.to_json().encode("utf-8") != arch:
        raise CheckpointSchemaMismatch(f"{path}: observation layout or architecture version changed")
    if expected_obs_dim is not None and spec.obs_dim != expected_obs_dim:
        raise CheckpointSchemaMismatch(
            f"{path}: policy expects {spec.obs_dim} observations, environment produces {expected_obs_dim}"
        )

    params = np.frombuffer(block, dtype="<f8").astype(np.float64)
    return Checkpoint(
        network=PolicyNetwork(spec, params=params),
        stiffness_id=raw_id.rstrip(b"\x00").decode("ascii"),
        stiffness=stiffness,
        seed=seed,
        iteration=iteration,
        path=path,
    )
