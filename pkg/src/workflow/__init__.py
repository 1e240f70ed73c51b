"""Campaign orchestration."""

from src.workflow.executor import (
    CampaignExecutor,
    cross_evaluation_flow,
    run_cross_evaluation,
    run_training,
    select_best_checkpoint,
    sweep_flow,
    train_flow,
)

__all__ = [
    "CampaignExecutor",
    "cross_evaluation_flow",
    "run_cross_evaluation",
    "run_training",
    "select_best_checkpoint",
    "sweep_flow",
    "train_flow",
]
