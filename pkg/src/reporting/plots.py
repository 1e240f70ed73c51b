"""Vector-graphics report figures, each written next to the CSV it was drawn from.

Every numeric label on a bar chart is formatted with ``LABEL_FORMAT`` and the sibling
CSV is written with the same format, so the numbers in the figure appear verbatim in
the CSV.
"""

import logging
from pathlib import Path
from typing import Dict, List, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from src.env.telemetry import ATTITUDE_COLUMNS, JOINT_COLUMNS  # noqa: E402
from src.evalsuite.cross_eval import AggregateResult, CrossEvalMatrix  # noqa: E402

logger = logging.getLogger(__name__)

LABEL_FORMAT = "%.6g"
SVG_METADATA = {"Date": None}

plt.rcParams["svg.fonttype"] = "none"
plt.rcParams["svg.hashsalt"] = "cflab"


def format_value(value: float) -> str:
    return LABEL_FORMAT % value


def _write_csv(frame: pd.DataFrame, path: Path) -> Path:
    frame.to_csv(path, index=False, float_format=LABEL_FORMAT)
    return path


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata=SVG_METADATA)
    plt.close(fig)
    logger.debug(f"Wrote {path}")
    return path


def _label_bars(ax, bars, values) -> None:
    for bar, value in zip(bars, values):
        if np.isfinite(value):
            ax.text(
                bar.get_x() + bar.get_width() / 2,
                bar.get_height(),
                format_value(value),
                ha="center",
                va="bottom",
                fontsize=6,
                rotation=90,
            )


def _hide_value_ticks(ax) -> None:
    # Bar values are carried by the labels only
    ax.set_yticks([])


def plot_energy_by_spring(matrix: CrossEvalMatrix, out_dir: Union[str, Path]) -> Dict[str, Path]:
    """Grouped bars: one group per spring, one bar per policy."""
    out_dir = Path(out_dir)
    grid = matrix.grid("mean_j_per_m")
    springs, policies = list(grid.index), list(grid.columns)

    fig, ax = plt.subplots(figsize=(max(6.0, 1.2 * len(springs)), 4.0))
    width = 0.8 / max(len(policies), 1)
    positions = np.arange(len(springs))
    for index, policy in enumerate(policies):
        values = grid[policy].to_numpy(dtype=float)
        heights = np.nan_to_num(values, nan=0.0)
        bars = ax.bar(positions + (index - (len(policies) - 1) / 2) * width, heights, width, label=policy)
        _label_bars(ax, bars, values)
    ax.set_xticks(positions)
    ax.set_xticklabels(springs)
    ax.set_xlabel("Foot spring")
    ax.set_ylabel("Energy per meter [J/m]")
    ax.set_title("Energy per meter by spring and policy")
    ax.legend(fontsize=6, ncol=2)
    _hide_value_ticks(ax)

    source = matrix.cells[["spring_id", "policy_id", "mean_j_per_m"]]
    return {
        "svg": _save(fig, out_dir / "energy_by_spring.svg"),
        "csv": _write_csv(source, out_dir / "energy_by_spring.csv"),
    }


def plot_energy_mean_std(aggregated: AggregateResult, out_dir: Union[str, Path]) -> Dict[str, Path]:
    """Mean across policies per spring with a one-std error bar."""
    out_dir = Path(out_dir)
    frame = aggregated.per_spring[["spring_id", "stiffness_n_per_m", "mean_j_per_m", "std_j_per_m"]]
    means = frame["mean_j_per_m"].to_numpy(dtype=float)
    stds = frame["std_j_per_m"].to_numpy(dtype=float)

    fig, ax = plt.subplots(figsize=(max(6.0, 0.9 * len(frame)), 4.0))
    positions = np.arange(len(frame))
    bars = ax.bar(positions, np.nan_to_num(means), yerr=np.nan_to_num(stds), capsize=3, color="tab:blue")
    _label_bars(ax, bars, means)
    ax.set_xticks(positions)
    ax.set_xticklabels(frame["spring_id"])
    ax.set_xlabel("Foot spring")
    ax.set_ylabel("Mean energy per meter [J/m]")
    ax.set_title(f"Mean across policies (minimum at {aggregated.argmin_spring})")
    _hide_value_ticks(ax)
    return {
        "svg": _save(fig, out_dir / "energy_mean_std.svg"),
        "csv": _write_csv(frame, out_dir / "energy_mean_std.csv"),
    }


def plot_policy_groups(aggregated: AggregateResult, out_dir: Union[str, Path]) -> Dict[str, Path]:
    """Soft-trained vs stiff-trained policy group means per spring."""
    out_dir = Path(out_dir)
    frame = aggregated.per_spring[["spring_id", "soft_mean_j_per_m", "stiff_mean_j_per_m"]]
    positions = np.arange(len(frame))

    fig, ax = plt.subplots(figsize=(max(6.0, 0.9 * len(frame)), 4.0))
    for offset, column, label in (
        (-0.2, "soft_mean_j_per_m", f"soft-trained ({', '.join(aggregated.soft_policies)})"),
        (0.2, "stiff_mean_j_per_m", f"stiff-trained ({', '.join(aggregated.stiff_policies)})"),
    ):
        values = frame[column].to_numpy(dtype=float)
        bars = ax.bar(positions + offset, np.nan_to_num(values), 0.4, label=label)
        _label_bars(ax, bars, values)
    ax.set_xticks(positions)
    ax.set_xticklabels(frame["spring_id"])
    ax.set_xlabel("Foot spring")
    ax.set_ylabel("Group mean energy per meter [J/m]")
    ax.set_title("Policy groups")
    ax.legend(fontsize=6)
    _hide_value_ticks(ax)
    return {
        "svg": _save(fig, out_dir / "policy_groups.svg"),
        "csv": _write_csv(frame, out_dir / "policy_groups.csv"),
    }


def plot_joint_trajectories(telemetry: pd.DataFrame, out_dir: Union[str, Path]) -> Dict[str, Path]:
    """Hip, knee and slider positions of both legs over one episode."""
    out_dir = Path(out_dir)
    columns: List[str] = ["time"]
    fig, axes = plt.subplots(len(JOINT_COLUMNS), 1, figsize=(8.0, 6.0), sharex=True)
    for ax, (group, joints) in zip(axes, JOINT_COLUMNS.items()):
        for joint in joints:
            column = f"{joint}_q"
            ax.plot(telemetry["time"], telemetry[column], linewidth=1.0, label=joint)
            columns.append(column)
        ax.set_ylabel(f"{group} [{'m' if group == 'slider' else 'rad'}]")
        ax.grid(True, alpha=0.3)
        ax.legend(loc="best", fontsize=6)
    axes[-1].set_xlabel("Time [s]")
    fig.suptitle("Joint trajectories")
    return {
        "svg": _save(fig, out_dir / "joint_trajectories.svg"),
        "csv": _write_csv(telemetry[columns], out_dir / "joint_trajectories.csv"),
    }


def plot_body_attitude(telemetry: pd.DataFrame, out_dir: Union[str, Path]) -> Dict[str, Path]:
    """Roll, pitch and yaw of the torso (roll and yaw stay zero in the plane)."""
    out_dir = Path(out_dir)
    fig, ax = plt.subplots(figsize=(8.0, 3.0))
    for column in ATTITUDE_COLUMNS:
        ax.plot(telemetry["time"], telemetry[column], linewidth=1.0, label=column)
    ax.set_xlabel("Time [s]")
    ax.set_ylabel("Angle [rad]")
    ax.set_title("Body attitude")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best", fontsize=6)
    return {
        "svg": _save(fig, out_dir / "body_attitude.svg"),
        "csv": _write_csv(telemetry[["time", *ATTITUDE_COLUMNS]], out_dir / "body_attitude.csv"),
    }
