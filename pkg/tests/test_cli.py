"""Tests for the cflab command line."""

import json

import numpy as np
import pytest

from src.cli import EXIT_OK, EXIT_PHYSICS, EXIT_RUNTIME, EXIT_USAGE, discover_checkpoints, main, UsageError
from src.config import get_settings
from src.env.locomotion_env import LocomotionEnv
from src.exceptions import NonFiniteLoss, NumericalDivergence
from src.learner.checkpoint import save_checkpoint
from src.learner.network import NetworkSpec, PolicyNetwork

SMALL_CONFIG = """\
run_id: cli
env:
  episode_length_s: 1.0
  grace_period_s: 0.2
  observation:
    history_length: 3
learner:
  num_envs: 2
  steps_per_iteration: 4
  hidden_sizes: [8]
  minibatches: 1
  epochs: 1
  iterations: 1
sweep:
  stiffness: [S1, S5]
  episodes_per_cell: 1
  episode_length_s: 0.5
  distance_floor: 0.01
"""


@pytest.fixture(autouse=True)
def local_settings(monkeypatch):
    for name in ("CFLAB_OUTPUT_DIR", "CFLAB_THREADS", "CFLAB_ORCHESTRATOR"):
        monkeypatch.delenv(name, raising=False)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "small.yaml"
    path.write_text(SMALL_CONFIG)
    return path


@pytest.fixture
def checkpoint(tmp_path, config_file):
    from src.config import load_config

    config = load_config(config_file)
    spring = config.spring("S5")
    env = LocomotionEnv(config, spring, 1, mode="eval")
    spec = NetworkSpec.from_config(env.obs_dim, env.action_dim, config.learner)
    return save_checkpoint(tmp_path / "policies" / "S5_seed0" / "best.ckpt", PolicyNetwork(spec), "S5", spring.stiffness, 0, 1)


def test_missing_command_is_usage_error():
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == EXIT_USAGE


def test_unknown_flag_is_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["sweep", "--bogus"])
    assert info.value.code == EXIT_USAGE


def test_unknown_stiffness_id(tmp_path):
    assert main(["--output-dir", str(tmp_path), "train", "--stiffness-id", "S9"]) == EXIT_USAGE


def test_bad_config_file(tmp_path):
    path = tmp_path / "dup.yaml"
    path.write_text("run_id: a\nrun_id: b\n")
    assert main(["--config", str(path), "model", "validate"]) == EXIT_USAGE


def test_missing_checkpoint(tmp_path):
    code = main(["eval", "--checkpoint", str(tmp_path / "none.ckpt"), "--stiffness-id", "S5"])
    assert code == EXIT_USAGE


def test_empty_policy_directory(tmp_path):
    (tmp_path / "policies").mkdir()
    assert main(["--output-dir", str(tmp_path), "sweep", "--policies", str(tmp_path / "policies")]) == EXIT_USAGE


def test_discover_checkpoints_prefers_best(tmp_path):
    for run, names in (("S1_seed0", ["best.ckpt", "latest.ckpt"]), ("S5_seed0", ["latest.ckpt"])):
        (tmp_path / run).mkdir()
        for name in names:
            (tmp_path / run / name).write_bytes(b"")
    found = discover_checkpoints(tmp_path)
    assert [path.relative_to(tmp_path).as_posix() for path in found] == ["S1_seed0/best.ckpt", "S5_seed0/latest.ckpt"]
    with pytest.raises(UsageError):
        discover_checkpoints(tmp_path / "missing")


def test_model_validate_prints_json(capsys):
    assert main(["model", "validate", "--stiffness-id", "S1"]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["total_mass_kg"] == pytest.approx(12.2)
    assert len(report["mass_matrix_eigenvalues"]) == 9


def test_train_writes_checkpoints(tmp_path, config_file):
    code = main(["--config", str(config_file), "--output-dir", str(tmp_path), "train", "--stiffness-id", "S5"])
    assert code == EXIT_OK
    run_dir = tmp_path / "cli" / "train" / "S5_seed0"
    assert (run_dir / "best.ckpt").exists()
    assert (run_dir / "latest.ckpt").exists()
    assert (run_dir / "learning_curve.csv").exists()
    assert (run_dir / "provenance.json").exists()


def test_eval_writes_records_and_telemetry(tmp_path, config_file, checkpoint):
    code = main(
        [
            "--config", str(config_file),
            "--output-dir", str(tmp_path / "out"),
            "eval", "--checkpoint", str(checkpoint), "--stiffness-id", "S1", "--telemetry",
        ]
    )
    assert code == EXIT_OK
    out_dir = tmp_path / "out" / "cli" / "eval" / "pi_S5_seed0_on_S1"
    assert (out_dir / "energy_records.csv").exists()
    assert (out_dir / "telemetry.csv").exists()


def test_sweep_writes_matrix(tmp_path, config_file, checkpoint):
    code = main(
        [
            "--config", str(config_file),
            "--output-dir", str(tmp_path / "out"),
            "sweep", "--policies", str(tmp_path / "policies"), "--springs", "S1,S5",
        ]
    )
    assert code == EXIT_OK
    matrix = tmp_path / "out" / "cli" / "sweep" / "cross_eval_matrix.csv"
    assert matrix.read_text().startswith("# schema: cross_eval_matrix v1")


def test_report_on_matrix(tmp_path, make_matrix, capsys):
    matrix = make_matrix(
        {("S1", "pi_S1"): 200.0, ("S1", "pi_S5"): 300.0, ("S5", "pi_S1"): 150.0, ("S5", "pi_S5"): 170.0}
    )
    path = matrix.to_csv(tmp_path / "cross_eval_matrix.csv")
    assert main(["report", "--matrix", str(path)]) == EXIT_OK
    assert (tmp_path / "report" / "report.md").exists()
    assert (tmp_path / "report" / "energy_by_spring.svg").exists()
    assert "✓" in capsys.readouterr().out


def test_report_rejects_missing_matrix(tmp_path):
    assert main(["report", "--matrix", str(tmp_path / "nope.csv")]) == EXIT_USAGE


@pytest.mark.slow
def test_physics_test_passes():
    assert main(["physics-test"]) == EXIT_OK


@pytest.mark.parametrize(
    "fault",
    [NonFiniteLoss("runs/nonfinite_minibatch_0.npz"), NumericalDivergence(np.array([True, False]))],
)
def test_training_fault_is_runtime_error(tmp_path, config_file, monkeypatch, capsys, fault):
    def failing_training(*args, **kwargs):
        raise fault

    monkeypatch.setattr("src.workflow.executor.run_training", failing_training)
    code = main(["--config", str(config_file), "--output-dir", str(tmp_path), "train", "--stiffness-id", "S5"])
    assert code == EXIT_RUNTIME
    assert type(fault).__name__ in capsys.readouterr().err


def test_corrupt_checkpoint_is_runtime_error(tmp_path, config_file):
    broken = tmp_path / "broken.ckpt"
    broken.write_bytes(b"not a checkpoint")
    code = main(["--config", str(config_file), "eval", "--checkpoint", str(broken), "--stiffness-id", "S5"])
    assert code == EXIT_RUNTIME


def test_failing_oracle_exits_with_physics_code(monkeypatch, capsys):
    from src.physics.oracles import OracleResult

    def broken_oracle():
        return OracleResult("broken", passed=False, measured=2.0, expected=1.0, tolerance=0.01)

    monkeypatch.setattr("src.physics.oracles.ORACLES", {"broken": broken_oracle})
    assert main(["physics-test"]) == EXIT_PHYSICS
    out = capsys.readouterr().out
    assert "FAIL" in out
    assert "0/1 physics oracles passed" in out
