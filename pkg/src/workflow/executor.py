"""Training and cross-evaluation campaigns, runnable locally or as Prefect flows."""

import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from prefect import flow, task

from src.schemas import RunConfig

logger = logging.getLogger(__name__)

ORCHESTRATORS = ("local", "prefect")


def policy_dir_name(stiffness_id: str, seed: int) -> str:
    return f"{stiffness_id}_seed{seed}"


def run_training(config: RunConfig, stiffness_id: str, seed: int, out_dir: Path) -> Path:
    """Train one policy on one spring and return its checkpoint directory."""
    from src.env.locomotion_env import LocomotionEnv
    from src.learner.trainer import train

    spring = config.spring(stiffness_id)
    run_dir = Path(out_dir) / policy_dir_name(stiffness_id, seed)
    logger.info(f"Training policy for {stiffness_id} ({spring.stiffness:g} N/m), seed {seed}")
    env = LocomotionEnv(config, spring, config.learner.num_envs, seed=seed, mode="train")
    train(
        env,
        config.learner,
        seed=seed,
        checkpoint_dir=run_dir,
        stiffness_id=spring.stiffness_id,
        stiffness=spring.stiffness,
    )
    return run_dir


def select_best_checkpoint(
    config: RunConfig,
    stiffness_id: str,
    candidates: Sequence[Path],
    n_episodes: Optional[int] = None,
    max_fall_rate: float = 0.2,
) -> Path:
    """Pick the candidate with the lowest own-spring energy among non-falling policies.

    Falls back to the lowest fall rate when every candidate falls too often.
    """
    from src.evalsuite.cross_eval import run_cell

    if not candidates:
        raise ValueError(f"no checkpoints to choose from for {stiffness_id}")
    spring = config.spring(stiffness_id)
    episodes = n_episodes or config.sweep.episodes_per_cell
    scored = []
    for path in candidates:
        stats = run_cell(path, spring, episodes, config.sweep.base_seed, config)
        energy = stats.mean_j_per_m if math.isfinite(stats.mean_j_per_m) else math.inf
        scored.append((stats.fall_rate, energy, str(path)))
        logger.info(f"{path}: {energy:.2f} J/m, fall rate {stats.fall_rate:.2f}")

    upright = [entry for entry in scored if entry[0] < max_fall_rate and math.isfinite(entry[1])]
    if upright:
        best = min(upright, key=lambda entry: (entry[1], entry[2]))
    else:
        logger.warning(f"Every {stiffness_id} candidate falls too often; choosing the steadiest")
        best = min(scored, key=lambda entry: (entry[0], entry[1], entry[2]))
    return Path(best[2])


def run_cross_evaluation(
    config: RunConfig,
    checkpoints: Sequence[Path],
    stiffness_ids: Sequence[str],
    out_dir: Path,
    workers: int = 1,
    n_episodes: Optional[int] = None,
    policy_ids: Optional[Sequence[str]] = None,
    render: bool = True,
) -> Dict[str, Any]:
    """Fill the matrix, write its CSV and optionally render the report bundle."""
    from src.evalsuite.cross_eval import cross_matrix
    from src.reporting.report import build_report

    out_dir = Path(out_dir)
    springs = [config.spring(stiffness_id) for stiffness_id in stiffness_ids]
    matrix = cross_matrix(
        checkpoints,
        springs,
        n_episodes or config.sweep.episodes_per_cell,
        config.sweep.base_seed,
        config,
        workers=workers,
        policy_ids=policy_ids,
    )
    matrix_path = matrix.to_csv(out_dir / "cross_eval_matrix.csv")
    result: Dict[str, Any] = {"matrix_path": str(matrix_path), "cells": len(matrix.cells)}
    if render:
        try:
            bundle = build_report(matrix, out_dir / "report")
        except ValueError as e:
            logger.warning(f"Report skipped: {e}")
            result["report_files"] = []
            return result
        result["report_files"] = [str(path) for path in bundle.paths]
        result["argmin_spring"] = bundle.aggregated.argmin_spring
    return result


@task(name="train_policy")
def train_policy_task(config: RunConfig, stiffness_id: str, seed: int, out_dir: str) -> str:
    try:
        return str(run_training(config, stiffness_id, seed, Path(out_dir)))
    except Exception as e:
        logger.error(f"Training {stiffness_id} seed {seed} failed: {e}")
        raise


@task(name="select_best_checkpoint")
def select_best_checkpoint_task(config: RunConfig, stiffness_id: str, candidates: List[str]) -> str:
    return str(select_best_checkpoint(config, stiffness_id, [Path(path) for path in candidates]))


@task(name="cross_evaluate")
def cross_evaluate_task(
    config: RunConfig,
    checkpoints: List[str],
    stiffness_ids: List[str],
    out_dir: str,
    workers: int,
    policy_ids: Optional[List[str]] = None,
    render: bool = True,
) -> Dict[str, Any]:
    try:
        return run_cross_evaluation(
            config,
            [Path(path) for path in checkpoints],
            stiffness_ids,
            Path(out_dir),
            workers=workers,
            policy_ids=policy_ids,
            render=render,
        )
    except Exception as e:
        logger.error(f"Cross-evaluation failed: {e}")
        raise


@flow(name="train_policies")
def train_flow(
    config: RunConfig, stiffness_ids: List[str], seeds: List[int], out_dir: str
) -> Dict[str, List[str]]:
    """Train one policy per (stiffness, seed).

    Returns:
        Map of stiffness id -> checkpoint directories
    """
    logger.info(f"Starting training flow: {stiffness_ids} x seeds {seeds}")
    runs: Dict[str, List[str]] = {}
    for stiffness_id in stiffness_ids:
        runs[stiffness_id] = [
            train_policy_task(config, stiffness_id, seed, out_dir) for seed in seeds
        ]
    return runs


@flow(name="cross_evaluation")
def cross_evaluation_flow(
    config: RunConfig,
    runs: Dict[str, List[str]],
    stiffness_ids: List[str],
    out_dir: str,
    workers: int = 1,
) -> Dict[str, Any]:
    """Pick the best checkpoint per training spring, then evaluate it on every spring."""
    chosen = {
        stiffness_id: select_best_checkpoint_task(
            config, stiffness_id, [str(Path(run) / "best.ckpt") for run in run_dirs]
        )
        for stiffness_id, run_dirs in runs.items()
    }
    policy_ids = [f"pi_{stiffness_id}" for stiffness_id in chosen]
    return cross_evaluate_task(config, list(chosen.values()), stiffness_ids, out_dir, workers, policy_ids)


@flow(name="sweep")
def sweep_flow(
    config: RunConfig,
    checkpoints: List[str],
    stiffness_ids: List[str],
    out_dir: str,
    workers: int = 1,
    policy_ids: Optional[List[str]] = None,
    render: bool = False,
) -> Dict[str, Any]:
    """Evaluate already chosen checkpoints on every spring."""
    logger.info(f"Starting sweep flow: {len(checkpoints)} policies x {stiffness_ids}")
    return cross_evaluate_task(config, checkpoints, stiffness_ids, out_dir, workers, policy_ids, render)


class CampaignExecutor:
    """Runs a campaign in-process or through Prefect."""

    def __init__(self, orchestrator: str = "local"):
        if orchestrator not in ORCHESTRATORS:
            raise ValueError(
                f"Unknown orchestrator: {orchestrator}. Available orchestrators: {list(ORCHESTRATORS)}"
            )
        self.orchestrator = orchestrator

    def train(
        self, config: RunConfig, stiffness_ids: List[str], seeds: List[int], out_dir: Path
    ) -> Dict[str, List[str]]:
        if self.orchestrator == "prefect":
            return train_flow(config, stiffness_ids, seeds, str(out_dir))
        return {
            stiffness_id: [str(run_training(config, stiffness_id, seed, out_dir)) for seed in seeds]
            for stiffness_id in stiffness_ids
        }

    def cross_evaluate(
        self,
        config: RunConfig,
        checkpoints: List[Path],
        stiffness_ids: List[str],
        out_dir: Path,
        workers: int = 1,
        policy_ids: Optional[List[str]] = None,
        render: bool = False,
    ) -> Dict[str, Any]:
        if self.orchestrator == "prefect":
            return sweep_flow(
                config,
                [str(path) for path in checkpoints],
                list(stiffness_ids),
                str(out_dir),
                workers,
                policy_ids,
                render,
            )
        return run_cross_evaluation(
            config,
            checkpoints,
            stiffness_ids,
            out_dir,
            workers=workers,
            policy_ids=policy_ids,
            render=render,
        )

    def campaign(
        self,
        config: RunConfig,
        stiffness_ids: List[str],
        seeds: List[int],
        out_dir: Path,
        workers: int = 1,
    ) -> Dict[str, Any]:
        """Train every (stiffness, seed), keep the best seed per spring, cross-evaluate."""
        runs = self.train(config, stiffness_ids, seeds, Path(out_dir) / "policies")
        if self.orchestrator == "prefect":
            return cross_evaluation_flow(config, runs, stiffness_ids, str(Path(out_dir) / "sweep"), workers)
        chosen = {
            stiffness_id: select_best_checkpoint(
                config, stiffness_id, [Path(run) / "best.ckpt" for run in run_dirs]
            )
            for stiffness_id, run_dirs in runs.items()
        }
        return run_cross_evaluation(
            config,
            list(chosen.values()),
            stiffness_ids,
            Path(out_dir) / "sweep",
            workers=workers,
            policy_ids=[f"pi_{stiffness_id}" for stiffness_id in chosen],
        )
