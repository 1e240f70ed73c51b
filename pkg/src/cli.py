"""Command-line entry point.

Exit codes: 0 success, 1 usage or configuration error, 2 runtime fault,
3 physics oracle failure.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from src.config import get_settings, load_config, resolve_output_dir, write_provenance
from src.exceptions import ConfigParseError, ConfigValidationError, LabError
from src.schemas import RunConfig

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2
EXIT_PHYSICS = 3


class UsageError(Exception):
    """Bad flags or inputs detected before any work starts."""


class LabArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that reports usage errors with exit code 1."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _split_ids(value: str) -> List[str]:
    return [item.strip() for item in value.split(",") if item.strip()]


def discover_checkpoints(policies: Path) -> List[Path]:
    """Checkpoints directly in ``policies`` or one per run sub-directory.

    A run directory contributes ``best.ckpt``, falling back to ``latest.ckpt``.
    """
    if not policies.is_dir():
        raise UsageError(f"policy directory not found: {policies}")
    direct = sorted(policies.glob("*.ckpt"))
    if direct:
        return direct
    found = []
    for run_dir in sorted(path for path in policies.iterdir() if path.is_dir()):
        for name in ("best.ckpt", "latest.ckpt"):
            if (run_dir / name).exists():
                found.append(run_dir / name)
                break
    if not found:
        raise UsageError(f"no checkpoints found in {policies}")
    return found


def _require_springs(config: RunConfig, stiffness_ids: Sequence[str]) -> None:
    for stiffness_id in stiffness_ids:
        try:
            config.spring(stiffness_id)
        except ValueError as e:
            raise UsageError(
                f"unknown stiffness id {stiffness_id!r}; use S1-S8 or list it in sweep.stiffness"
            ) from e


def _artifact_dir(config: RunConfig, args: argparse.Namespace, *parts: str) -> Path:
    return resolve_output_dir(config, args.output_dir).joinpath(config.run_id, *parts)


def cmd_train(args: argparse.Namespace, config: RunConfig) -> int:
    from src.workflow.executor import CampaignExecutor

    if args.iterations is not None:
        learner = config.learner.model_copy(update={"iterations": args.iterations})
        config = config.model_copy(update={"learner": learner})
    _require_springs(config, [args.stiffness_id])
    out_dir = _artifact_dir(config, args, "train")
    executor = CampaignExecutor(get_settings().orchestrator)
    runs = executor.train(config, [args.stiffness_id], [args.seed], out_dir)
    run_dir = Path(runs[args.stiffness_id][0])
    write_provenance(config, run_dir, [args.seed], " ".join(sys.argv))
    print(f"Checkpoints and learning curve written to {run_dir}")
    return EXIT_OK


def cmd_eval(args: argparse.Namespace, config: RunConfig) -> int:
    from src.evalsuite.cross_eval import record_telemetry, run_cell
    from src.evalsuite.energy import records_frame

    checkpoint = Path(args.checkpoint)
    if not checkpoint.exists():
        raise UsageError(f"checkpoint not found: {checkpoint}")
    _require_springs(config, [args.stiffness_id])
    spring = config.spring(args.stiffness_id)
    episodes = args.episodes or config.sweep.episodes_per_cell
    stats = run_cell(checkpoint, spring, episodes, args.seed, config)

    out_dir = _artifact_dir(config, args, "eval", f"{stats.policy_id}_on_{spring.stiffness_id}")
    out_dir.mkdir(parents=True, exist_ok=True)
    records_frame(stats.records).to_csv(out_dir / "energy_records.csv", index=False, float_format="%.10g")
    if args.telemetry:
        frame = record_telemetry(checkpoint, spring, args.seed, config)
        frame.to_csv(out_dir / "telemetry.csv", index=False, float_format="%.10g")
    write_provenance(config, out_dir, [args.seed], " ".join(sys.argv))
    print(
        f"{stats.policy_id} on {spring.stiffness_id}: {stats.mean_j_per_m:.2f} J/m "
        f"(std {stats.std_j_per_m:.2f}, n={stats.n}), fall rate {stats.fall_rate:.2f}"
    )
    print(f"Energy records written to {out_dir}")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace, config: RunConfig) -> int:
    from src.workflow.executor import CampaignExecutor

    checkpoints = discover_checkpoints(Path(args.policies))
    springs = _split_ids(args.springs) if args.springs else [entry.id for entry in config.sweep.stiffness]
    if not springs:
        raise UsageError("--springs needs at least one stiffness id")
    _require_springs(config, springs)

    settings = get_settings()
    out_dir = _artifact_dir(config, args, "sweep")
    executor = CampaignExecutor(settings.orchestrator)
    result = executor.cross_evaluate(
        config,
        checkpoints,
        springs,
        out_dir,
        workers=args.workers or settings.threads,
        render=args.report,
    )
    write_provenance(config, out_dir, [config.sweep.base_seed], " ".join(sys.argv))
    print(f"Cross-evaluation matrix ({result['cells']} cells) written to {result['matrix_path']}")
    return EXIT_OK


def cmd_report(args: argparse.Namespace, config: RunConfig) -> int:
    import pandas as pd

    from src.evalsuite.cross_eval import CrossEvalMatrix
    from src.reporting.report import build_report

    matrix_path = Path(args.matrix)
    if not matrix_path.exists():
        raise UsageError(f"matrix file not found: {matrix_path}")
    try:
        matrix = CrossEvalMatrix.read_csv(matrix_path)
    except ValueError as e:
        raise UsageError(str(e)) from e
    telemetry = pd.read_csv(args.telemetry) if args.telemetry else None

    out_dir = Path(args.output_dir) if args.output_dir else matrix_path.parent / "report"
    bundle = build_report(matrix, out_dir, telemetry=telemetry)
    write_provenance(config, out_dir, [], " ".join(sys.argv))
    for path in bundle.paths:
        print(f"✓ {path}")
    return EXIT_OK


def cmd_physics_test(args: argparse.Namespace, config: RunConfig) -> int:
    from src.physics.oracles import run_oracle_battery

    results = run_oracle_battery()
    for result in results:
        print(result.summary())
    failed = [result for result in results if not result.passed]
    print(f"{len(results) - len(failed)}/{len(results)} physics oracles passed")
    return EXIT_PHYSICS if failed else EXIT_OK


def cmd_model_validate(args: argparse.Namespace, config: RunConfig) -> int:
    from src.physics.robot import RobotModel, describe_zero_pose

    _require_springs(config, [args.stiffness_id])
    model = RobotModel.from_config(config.model, config.spring(args.stiffness_id))
    print(json.dumps(describe_zero_pose(model), indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = LabArgumentParser(prog="cflab", description="Compliant-foot quadruped lab")
    parser.add_argument("--config", help="YAML run configuration (defaults when omitted)")
    parser.add_argument("--output-dir", help="Artifact root; overrides CFLAB_OUTPUT_DIR and the config")
    subparsers = parser.add_subparsers(dest="command", required=True)

    train = subparsers.add_parser("train", help="Train a policy on one foot spring")
    train.add_argument("--stiffness-id", required=True)
    train.add_argument("--seed", type=int, default=0)
    train.add_argument("--iterations", type=int, help="Override learner.iterations")
    train.set_defaults(handler=cmd_train)

    evaluate = subparsers.add_parser("eval", help="Evaluate one checkpoint on one spring")
    evaluate.add_argument("--checkpoint", required=True)
    evaluate.add_argument("--stiffness-id", required=True)
    evaluate.add_argument("--episodes", type=int)
    evaluate.add_argument("--seed", type=int, default=0)
    evaluate.add_argument("--telemetry", action="store_true", help="Also record one episode's telemetry")
    evaluate.set_defaults(handler=cmd_eval)

    sweep = subparsers.add_parser("sweep", help="Cross-evaluate policies over springs")
    sweep.add_argument("--springs", help="Comma separated stiffness ids (default: sweep.stiffness)")
    sweep.add_argument("--policies", required=True, help="Directory of checkpoints or run directories")
    sweep.add_argument("--workers", type=int, help="Worker processes (default: CFLAB_THREADS)")
    sweep.add_argument("--report", action="store_true", help="Render the report bundle as well")
    sweep.set_defaults(handler=cmd_sweep)

    report = subparsers.add_parser("report", help="Render plots and summary from a matrix CSV")
    report.add_argument("--matrix", required=True)
    report.add_argument("--telemetry", help="Telemetry CSV for the trajectory figures")
    report.set_defaults(handler=cmd_report)

    physics = subparsers.add_parser("physics-test", help="Run the physics oracle battery")
    physics.set_defaults(handler=cmd_physics_test)

    model = subparsers.add_parser("model", help="Robot model tools")
    model_commands = model.add_subparsers(dest="model_command", required=True)
    validate = model_commands.add_parser("validate", help="Print zero-pose geometry and mass matrix")
    validate.add_argument("--stiffness-id", default="S5")
    validate.set_defaults(handler=cmd_model_validate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=get_settings().log_level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    )

    try:
        config = load_config(args.config)
        return args.handler(args, config)
    except (ConfigParseError, ConfigValidationError, UsageError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (LabError, ValueError, OSError) as e:
        logger.error(f"{args.command} failed: {type(e).__name__}: {e}")
        print(f"runtime fault: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
