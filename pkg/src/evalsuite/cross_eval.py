"""Cross-evaluation of trained policies over a set of foot springs."""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from src.env.locomotion_env import LocomotionEnv, Termination
from src.env.telemetry import TelemetryRecorder
from src.evalsuite.energy import (
    EnergyRecord,
    energy_per_meter,
    mechanical_work,
    summarize,
)
from src.exceptions import InsufficientDistance
from src.learner.checkpoint import load_checkpoint
from src.learner.ppo import mean_action
from src.schemas import STIFFNESS_LADDER, RunConfig, SpringFootParams

logger = logging.getLogger(__name__)

MATRIX_SCHEMA = "# schema: cross_eval_matrix v1"
AGGREGATE_SCHEMA = "# schema: cross_eval_aggregate v1"
MATRIX_COLUMNS = [
    "spring_id",
    "stiffness_n_per_m",
    "policy_id",
    "mean_j_per_m",
    "std_j_per_m",
    "n",
    "fall_rate",
    "mean_speed",
    "policy_stiffness_n_per_m",
    "mean_abs_j_per_m",
    "discarded",
    "note",
]
FLOAT_FORMAT = "%.10g"
TIME_EPS = 1e-9


@dataclass
class CellStats:
    """Statistics of one (spring, policy) cell."""

    spring_id: str
    stiffness_n_per_m: float
    policy_id: str
    policy_stiffness_n_per_m: float
    mean_j_per_m: float
    std_j_per_m: float
    n: int
    mean_abs_j_per_m: float
    fall_rate: float
    mean_speed: float
    discarded: int
    note: str = ""
    records: List[EnergyRecord] = field(default_factory=list)

    @classmethod
    def failed(
        cls, spring: SpringFootParams, policy_id: str, note: str, policy_stiffness: float = float("nan")
    ) -> "CellStats":
        """Annotated empty cell for a cell that raised."""
        return cls(
            spring_id=spring.stiffness_id,
            stiffness_n_per_m=spring.stiffness,
            policy_id=policy_id,
            policy_stiffness_n_per_m=policy_stiffness,
            mean_j_per_m=float("nan"),
            std_j_per_m=float("nan"),
            n=0,
            mean_abs_j_per_m=float("nan"),
            fall_rate=float("nan"),
            mean_speed=float("nan"),
            discarded=0,
            note=note,
        )

    def as_row(self) -> Dict[str, Any]:
        row = {name: getattr(self, name) for name in MATRIX_COLUMNS}
        row["note"] = clean_note(self.note)
        return row


def clean_note(note: str) -> str:
    """Single-line annotation that cannot be mistaken for a CSV comment."""
    return " ".join(str(note).replace("#", "").split())


def run_cell(
    checkpoint_path: Union[str, Path],
    spring: SpringFootParams,
    n_episodes: int,
    base_seed: int,
    config: RunConfig,
    policy_id: Optional[str] = None,
) -> CellStats:
    """Evaluate one policy on one spring with the deterministic mean action.

    Episodes run in one nominal eval batch; episode k is seeded with (base_seed, k),
    so every cell sharing ``base_seed`` sees the same initial perturbations. Energy and
    distance are measured from the end of the grace period to the end of the episode.

    Args:
        checkpoint_path: Policy checkpoint
        spring: Foot spring of the evaluated robot
        n_episodes: Episodes in the cell
        base_seed: Seed shared by all cells of a sweep
        config: Run configuration
        policy_id: Column label; derived from the checkpoint header when None

    Returns:
        CellStats with per-episode EnergyRecords

    Raises:
        ChecksumMismatch: The checkpoint is corrupt
        CheckpointSchemaMismatch: The checkpoint does not match the observation layout
    """
    sweep = config.sweep
    seeds = [np.random.SeedSequence([base_seed, k]) for k in range(n_episodes)]
    env = LocomotionEnv(
        config,
        spring,
        n_episodes,
        mode="eval",
        episode_length_s=sweep.episode_length_s,
        env_seeds=seeds,
        v_x_cmd=sweep.eval_v_x_cmd,
    )
    checkpoint = load_checkpoint(checkpoint_path, expected_obs_dim=env.obs_dim)
    policy_id = policy_id or checkpoint.policy_id
    network = checkpoint.network
    sample_dt = config.physics.dt
    grace = env.grace_period

    observation = env.reset()
    active = np.ones(n_episodes, dtype=bool)
    x_start = np.full(n_episodes, np.nan)
    t_start = np.full(n_episodes, np.nan)
    fell = np.zeros(n_episodes, dtype=bool)
    fault = np.zeros(n_episodes, dtype=bool)
    torque_traces: List[List[np.ndarray]] = [[] for _ in range(n_episodes)]
    velocity_traces: List[List[np.ndarray]] = [[] for _ in range(n_episodes)]

    while active.any():
        time_before = env.time
        measuring = active & (time_before >= grace - TIME_EPS)
        first = measuring & np.isnan(x_start)
        x_start[first] = env.state.base_x[first]
        t_start[first] = time_before[first]

        actions = mean_action(network, observation)
        observation, _, done, info = env.step(actions, active=active)
        for k in np.flatnonzero(measuring):
            torque_traces[k].append(info["torques"][k])
            velocity_traces[k].append(info["joint_velocity"][k])
        fell |= done & (info["termination"] == Termination.FELL)
        fault |= done & (info["termination"] == Termination.FAULT)
        active &= ~done

    records: List[EnergyRecord] = []
    for k in range(n_episodes):
        torques = np.concatenate(torque_traces[k]) if torque_traces[k] else np.zeros((0, 4))
        velocities = np.concatenate(velocity_traces[k]) if velocity_traces[k] else np.zeros((0, 4))
        measured = not np.isnan(x_start[k])
        distance = float(env.state.base_x[k] - x_start[k]) if measured else 0.0
        duration = float(env.time[k] - t_start[k]) if measured else 0.0
        work = mechanical_work(torques, velocities, sample_dt, "positive")
        abs_work = mechanical_work(torques, velocities, sample_dt, "absolute")
        discarded = False
        energy = abs_energy = float("nan")
        if not (fell[k] or fault[k]):
            try:
                energy = energy_per_meter(
                    torques,
                    velocities,
                    sample_dt,
                    distance,
                    sweep.energy_convention,
                    sweep.distance_floor,
                )
                abs_energy = energy_per_meter(
                    torques, velocities, sample_dt, distance, "absolute", sweep.distance_floor
                )
            except InsufficientDistance as e:
                logger.warning(f"{policy_id} on {spring.stiffness_id}, episode {k}: {e}; discarded")
                discarded = True
        records.append(
            EnergyRecord(
                episode_id=k,
                stiffness_id=spring.stiffness_id,
                policy_id=policy_id,
                seed=base_seed,
                work_j=work,
                abs_work_j=abs_work,
                distance_m=distance,
                energy_per_meter=energy,
                abs_energy_per_meter=abs_energy,
                fell=bool(fell[k]),
                fault=bool(fault[k]),
                discarded=discarded,
                mean_speed=distance / duration if duration > 0 else 0.0,
            )
        )

    usable = [record for record in records if record.usable]
    positive = summarize([record.energy_per_meter for record in usable])
    absolute = summarize([record.abs_energy_per_meter for record in usable])
    upright = [record.mean_speed for record in records if not (record.fell or record.fault)]
    note = ""
    if fault.any():
        note = f"{int(fault.sum())} episode(s) aborted on numerical fault"
    stats = CellStats(
        spring_id=spring.stiffness_id,
        stiffness_n_per_m=spring.stiffness,
        policy_id=policy_id,
        policy_stiffness_n_per_m=checkpoint.stiffness,
        mean_j_per_m=positive["mean"],
        std_j_per_m=positive["std"],
        n=positive["n"],
        mean_abs_j_per_m=absolute["mean"],
        fall_rate=float(fell.mean()),
        mean_speed=float(np.mean(upright)) if upright else float("nan"),
        discarded=sum(record.discarded for record in records),
        note=note,
        records=records,
    )
    logger.info(
        f"Cell {spring.stiffness_id} x {policy_id}: {stats.mean_j_per_m:.2f} J/m over n={stats.n}, "
        f"fall rate {stats.fall_rate:.2f}"
    )
    return stats


def record_telemetry(
    checkpoint_path: Union[str, Path],
    spring: SpringFootParams,
    seed: int,
    config: RunConfig,
) -> pd.DataFrame:
    """Run one evaluation episode and return its per-step telemetry."""
    sweep = config.sweep
    env = LocomotionEnv(
        config,
        spring,
        1,
        mode="eval",
        episode_length_s=sweep.episode_length_s,
        env_seeds=[np.random.SeedSequence([seed, 0])],
        v_x_cmd=sweep.eval_v_x_cmd,
    )
    network = load_checkpoint(checkpoint_path, expected_obs_dim=env.obs_dim).network
    recorder = TelemetryRecorder()
    observation = env.reset()
    done = np.zeros(1, dtype=bool)
    while not done[0]:
        observation, reward, done, info = env.step(mean_action(network, observation))
        recorder.record(env, reward, info)
    return recorder.to_frame()


def _cell_or_annotation(
    checkpoint_path: str,
    policy_id: str,
    spring: SpringFootParams,
    n_episodes: int,
    seed: int,
    config: RunConfig,
) -> CellStats:
    try:
        return run_cell(checkpoint_path, spring, n_episodes, seed, config, policy_id=policy_id)
    except Exception as e:
        logger.warning(f"Cell {spring.stiffness_id} x {policy_id} failed: {e}")
        return CellStats.failed(spring, policy_id, f"{type(e).__name__}: {e}")


class CrossEvalMatrix:
    """Spring x policy grid of energy statistics, stored as one row per cell."""

    def __init__(self, cells: pd.DataFrame):
        self.cells = cells.reset_index(drop=True)[MATRIX_COLUMNS]

    @classmethod
    def from_cells(cls, cells: Sequence[CellStats]) -> "CrossEvalMatrix":
        return cls(pd.DataFrame([cell.as_row() for cell in cells], columns=MATRIX_COLUMNS))

    @property
    def springs(self) -> List[str]:
        return list(dict.fromkeys(self.cells["spring_id"]))

    @property
    def policies(self) -> List[str]:
        return list(dict.fromkeys(self.cells["policy_id"]))

    def grid(self, value: str = "mean_j_per_m") -> pd.DataFrame:
        """Rows are springs, columns are policies, both in matrix order."""
        table = self.cells.pivot(index="spring_id", columns="policy_id", values=value)
        return table.loc[self.springs, self.policies]

    def cell(self, spring_id: str, policy_id: str) -> pd.Series:
        selected = self.cells[(self.cells["spring_id"] == spring_id) & (self.cells["policy_id"] == policy_id)]
        if selected.empty:
            raise KeyError(f"no cell ({spring_id}, {policy_id})")
        return selected.iloc[0]

    def to_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        frame = self.cells.copy()
        frame["note"] = frame["note"].fillna("").map(clean_note)
        with open(path, "w", newline="") as handle:
            handle.write(MATRIX_SCHEMA + "\n")
            frame.to_csv(handle, index=False, float_format=FLOAT_FORMAT)
        logger.info(f"Wrote cross-evaluation matrix ({len(frame)} cells) to {path}")
        return path

    @classmethod
    def read_csv(cls, path: Union[str, Path]) -> "CrossEvalMatrix":
        frame = pd.read_csv(path, comment="#", keep_default_na=True, dtype={"note": str})
        missing = [name for name in MATRIX_COLUMNS if name not in frame.columns]
        if missing:
            raise ValueError(f"{path}: missing matrix columns {missing}")
        frame["note"] = frame["note"].fillna("")
        frame["spring_id"] = frame["spring_id"].astype(str)
        frame["policy_id"] = frame["policy_id"].astype(str)
        return cls(frame)


def cross_matrix(
    checkpoints: Sequence[Union[str, Path]],
    springs: Sequence[SpringFootParams],
    n_episodes: int,
    seed: int,
    config: RunConfig,
    workers: int = 1,
    policy_ids: Optional[Sequence[str]] = None,
) -> CrossEvalMatrix:
    """Evaluate every checkpoint on every spring.

    Cells are independent and may run in worker processes; the matrix is assembled in
    spring-major, checkpoint-minor order regardless of completion order. A cell that
    raises becomes an empty cell whose ``note`` carries the error.

    Args:
        checkpoints: Policy checkpoint paths (matrix columns)
        springs: Foot springs (matrix rows)
        n_episodes: Episodes per cell
        seed: Base seed shared by every cell
        config: Run configuration
        workers: Worker processes; 1 evaluates in-process
        policy_ids: Column labels; default to the checkpoint parent directory name

    Returns:
        CrossEvalMatrix
    """
    if not checkpoints or not springs:
        raise ValueError("cross evaluation needs at least one checkpoint and one spring")
    paths = [str(path) for path in checkpoints]
    labels = list(policy_ids) if policy_ids is not None else [Path(path).parent.name for path in paths]
    if len(set(labels)) != len(labels):
        labels = [f"{label}:{Path(path).stem}" for label, path in zip(labels, paths)]

    jobs = [
        (path, label, spring, n_episodes, seed, config)
        for spring in springs
        for path, label in zip(paths, labels)
    ]
    logger.info(f"Cross evaluation: {len(springs)} springs x {len(paths)} policies, {workers} worker(s)")
    if workers <= 1:
        cells = [_cell_or_annotation(*job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_cell_or_annotation, *job) for job in jobs]
            cells = [future.result() for future in futures]

    _fill_policy_stiffness(cells)
    return CrossEvalMatrix.from_cells(cells)


def _fill_policy_stiffness(cells: List[CellStats]) -> None:
    known = {
        cell.policy_id: cell.policy_stiffness_n_per_m
        for cell in cells
        if not math.isnan(cell.policy_stiffness_n_per_m)
    }
    for cell in cells:
        if math.isnan(cell.policy_stiffness_n_per_m) and cell.policy_id in known:
            cell.policy_stiffness_n_per_m = known[cell.policy_id]


@dataclass
class AggregateResult:
    """Per-spring statistics across policies and the soft/stiff policy groups."""

    per_spring: pd.DataFrame
    soft_policies: List[str]
    stiff_policies: List[str]
    argmin_spring: str
    gap_vs_softest_pct: float
    gap_vs_stiffest_pct: float

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for _, spring in self.per_spring.iterrows():
            for kind, mean, std, n in (
                ("spring", spring["mean_j_per_m"], spring["std_j_per_m"], spring["n_policies"]),
                ("group_soft", spring["soft_mean_j_per_m"], np.nan, spring["n_soft"]),
                ("group_stiff", spring["stiff_mean_j_per_m"], np.nan, spring["n_stiff"]),
            ):
                rows.append(
                    {
                        "kind": kind,
                        "spring_id": spring["spring_id"],
                        "stiffness_n_per_m": spring["stiffness_n_per_m"],
                        "mean_j_per_m": mean,
                        "std_j_per_m": std,
                        "n": n,
                    }
                )
        return pd.DataFrame(rows)

    def to_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as handle:
            handle.write(AGGREGATE_SCHEMA + "\n")
            handle.write(
                f"# argmin_spring={self.argmin_spring} gap_vs_softest_pct={self.gap_vs_softest_pct:.6g} "
                f"gap_vs_stiffest_pct={self.gap_vs_stiffest_pct:.6g}\n"
            )
            self.to_frame().to_csv(handle, index=False, float_format=FLOAT_FORMAT)
        return path


def training_stiffness(policy_id: str, recorded: float = float("nan")) -> float:
    """Training stiffness of a policy column.

    Uses the value stored in its checkpoint, else the ladder entry named by the policy id
    (``pi_S5``, ``S5_seed0``, ...). Unknown policies sort after every known one.
    """
    if math.isfinite(recorded):
        return recorded
    stiffness_id = policy_id.removeprefix("pi_").split(":")[0].split("_seed")[0]
    return STIFFNESS_LADDER.get(stiffness_id, math.inf)


def policy_groups(matrix: CrossEvalMatrix) -> Dict[str, List[str]]:
    """Split policies by training stiffness; the soft group takes the middle one when odd."""
    recorded = (
        matrix.cells.groupby("policy_id", sort=False)["policy_stiffness_n_per_m"].max().reindex(matrix.policies)
    )
    stiffness = {pid: training_stiffness(pid, float(recorded[pid])) for pid in matrix.policies}
    order = sorted(matrix.policies, key=lambda pid: (stiffness[pid], pid))
    cut = math.ceil(len(order) / 2)
    return {"soft": order[:cut], "stiff": order[cut:]}


def _percent_gap(reference: float, value: float) -> float:
    if not np.isfinite(reference) or reference == 0:
        return float("nan")
    return 100.0 * (reference - value) / reference


def aggregate(matrix: CrossEvalMatrix) -> AggregateResult:
    """Aggregate cell means across policies for every spring.

    Args:
        matrix: Filled cross-evaluation matrix

    Returns:
        AggregateResult with per-spring mean/std (population), group means and the
        minimum-energy spring with its percentage gaps to the softest and stiffest springs

    Raises:
        ValueError: The matrix has no finite cell
    """
    cells = matrix.cells
    if cells.empty or not np.isfinite(cells["mean_j_per_m"].astype(float)).any():
        raise ValueError("cannot aggregate a matrix without finite cells")
    groups = policy_groups(matrix)

    rows = []
    for spring_id in matrix.springs:
        spring_cells = cells[cells["spring_id"] == spring_id]
        values = spring_cells.set_index("policy_id")["mean_j_per_m"].astype(float)
        finite = values[np.isfinite(values)]
        soft = finite[finite.index.isin(groups["soft"])]
        stiff = finite[finite.index.isin(groups["stiff"])]
        rows.append(
            {
                "spring_id": spring_id,
                "stiffness_n_per_m": float(spring_cells["stiffness_n_per_m"].iloc[0]),
                "mean_j_per_m": float(finite.mean()) if len(finite) else float("nan"),
                "std_j_per_m": float(finite.std(ddof=0)) if len(finite) else float("nan"),
                "n_policies": int(len(finite)),
                "soft_mean_j_per_m": float(soft.mean()) if len(soft) else float("nan"),
                "n_soft": int(len(soft)),
                "stiff_mean_j_per_m": float(stiff.mean()) if len(stiff) else float("nan"),
                "n_stiff": int(len(stiff)),
            }
        )
    per_spring = pd.DataFrame(rows)

    valid = per_spring[np.isfinite(per_spring["mean_j_per_m"])]
    best = valid.loc[valid["mean_j_per_m"].idxmin()]
    softest = valid.loc[valid["stiffness_n_per_m"].idxmin()]
    stiffest = valid.loc[valid["stiffness_n_per_m"].idxmax()]
    result = AggregateResult(
        per_spring=per_spring,
        soft_policies=groups["soft"],
        stiff_policies=groups["stiff"],
        argmin_spring=str(best["spring_id"]),
        gap_vs_softest_pct=_percent_gap(softest["mean_j_per_m"], best["mean_j_per_m"]),
        gap_vs_stiffest_pct=_percent_gap(stiffest["mean_j_per_m"], best["mean_j_per_m"]),
    )
    logger.info(
        f"Minimum-energy spring {result.argmin_spring}: {result.gap_vs_softest_pct:.1f}% below softest, "
        f"{result.gap_vs_stiffest_pct:.1f}% below stiffest"
    )
    return result
