"""Tests for the binary checkpoint format."""

import numpy as np
import pytest

from src.exceptions import CheckpointSchemaMismatch, ChecksumMismatch
from src.learner.checkpoint import load_checkpoint, save_checkpoint
from src.learner.network import NetworkSpec, PolicyNetwork


@pytest.fixture
def network():
    return PolicyNetwork(NetworkSpec(obs_dim=6, action_dim=4, hidden_sizes=(8, 8)), seed=4)


def test_round_trip(tmp_path, network):
    path = save_checkpoint(tmp_path / "best.ckpt", network, "S5", 14500.0, 2, 17)
    loaded = load_checkpoint(path, expected_obs_dim=6)
    np.testing.assert_array_equal(loaded.network.params, network.params)
    assert loaded.network.spec == network.spec
    assert loaded.stiffness_id == "S5"
    assert loaded.stiffness == 14500.0
    assert loaded.seed == 2
    assert loaded.iteration == 17
    assert loaded.policy_id == "pi_S5_seed2"
    assert not (tmp_path / "best.ckpt.tmp").exists()


def test_truncated_file_fails_checksum(tmp_path, network):
    path = save_checkpoint(tmp_path / "p.ckpt", network, "S1", 1000.0, 0, 1)
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(ChecksumMismatch):
        load_checkpoint(path)


def test_flipped_parameter_byte_fails_checksum(tmp_path, network):
    path = save_checkpoint(tmp_path / "p.ckpt", network, "S1", 1000.0, 0, 1)
    data = bytearray(path.read_bytes())
    data[-3] ^= 0xFF
    path.write_bytes(bytes(data))
    with pytest.raises(ChecksumMismatch):
        load_checkpoint(path)


def test_observation_size_mismatch(tmp_path, network):
    path = save_checkpoint(tmp_path / "p.ckpt", network, "S1", 1000.0, 0, 1)
    with pytest.raises(CheckpointSchemaMismatch):
        load_checkpoint(path, expected_obs_dim=760)


def test_foreign_file_is_rejected(tmp_path):
    path = tmp_path / "junk.ckpt"
    path.write_bytes(b"NOTACKPT" + bytes(64))
    with pytest.raises(CheckpointSchemaMismatch):
        load_checkpoint(path)
