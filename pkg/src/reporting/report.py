"""Report bundle: figures, their source CSVs and a markdown summary."""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np
import pandas as pd

from src.evalsuite.cross_eval import AggregateResult, CrossEvalMatrix, aggregate
from src.reporting.plots import (
    format_value,
    plot_body_attitude,
    plot_energy_by_spring,
    plot_energy_mean_std,
    plot_joint_trajectories,
    plot_policy_groups,
)

logger = logging.getLogger(__name__)

# Published figures for a full-size robot; shown for orientation, never asserted
REFERENCE_LINES = [
    ("simulation", "energy per meter across springs spans from 289 J/m down to roughly 159 J/m"),
    ("simulation", "S5 reduces energy consumption by 12.8% relative to S8"),
    ("simulation", "S5 reduces energy consumption by 45.18% relative to S1"),
    ("hardware", "energy per meter across springs spans from 350 J/m down to 209 J/m"),
    ("hardware", "S5 reduces energy consumption by 16.94% relative to S8"),
    ("hardware", "S5 reduces energy consumption by 40.71% relative to S1"),
    ("hardware", "hardware energy is about 25% above simulation"),
    ("overall", "the compliant foot lowers energy per meter by about 17%"),
]


@dataclass
class ReportBundle:
    output_dir: Path
    files: Dict[str, Path] = field(default_factory=dict)
    aggregated: Optional[AggregateResult] = None

    @property
    def paths(self) -> List[Path]:
        return list(self.files.values())


def trend_holds(aggregated: AggregateResult) -> bool:
    """True when an interior spring beats both the softest and the stiffest one."""
    frame = aggregated.per_spring.dropna(subset=["mean_j_per_m"]).sort_values("stiffness_n_per_m")
    if len(frame) < 3:
        return False
    means = frame["mean_j_per_m"].to_numpy()
    interior = means[1:-1].min()
    return bool(interior < means[0] and interior < means[-1])


def render_markdown(matrix: CrossEvalMatrix, aggregated: AggregateResult) -> str:
    lines = ["# Cross-evaluation report", "", "## Reference figures (not reproduced)", ""]
    for source, text in REFERENCE_LINES:
        lines.append(f"- [{source}, not reproduced] {text}")
    lines += [
        "",
        "The planar desk-scale model is not expected to match these absolute numbers.",
        "",
        "## Achieved",
        "",
        f"- minimum-energy spring: {aggregated.argmin_spring}",
        f"- gap vs softest spring: {format_value(aggregated.gap_vs_softest_pct)}%",
        f"- gap vs stiffest spring: {format_value(aggregated.gap_vs_stiffest_pct)}%",
        f"- soft-trained group: {', '.join(aggregated.soft_policies) or '-'}",
        f"- stiff-trained group: {', '.join(aggregated.stiff_policies) or '-'}",
    ]
    if trend_holds(aggregated):
        lines.append("- interior-minimum trend: holds")
    else:
        lines.append(
            "- interior-minimum trend: NOT observed; inspect fall rates, discarded episodes and "
            "learning curves before drawing conclusions"
        )

    lines += ["", "## Per-spring mean across policies", "", "| spring | N/m | mean J/m | std J/m | policies |"]
    lines.append("|---|---|---|---|---|")
    for _, row in aggregated.per_spring.iterrows():
        lines.append(
            f"| {row['spring_id']} | {format_value(row['stiffness_n_per_m'])} | "
            f"{format_value(row['mean_j_per_m'])} | {format_value(row['std_j_per_m'])} | {row['n_policies']} |"
        )

    annotated = matrix.cells[matrix.cells["note"].fillna("") != ""]
    if not annotated.empty:
        lines += ["", "## Annotated cells", ""]
        for _, row in annotated.iterrows():
            lines.append(f"- {row['spring_id']} x {row['policy_id']}: {row['note']}")
    falls = matrix.cells["fall_rate"].astype(float)
    if np.nanmax(falls.to_numpy(), initial=0.0) > 0:
        lines += ["", f"Highest cell fall rate: {format_value(float(np.nanmax(falls)))}"]
    return "\n".join(lines) + "\n"


def build_report(
    matrix: CrossEvalMatrix,
    out_dir: Union[str, Path],
    telemetry: Optional[pd.DataFrame] = None,
) -> ReportBundle:
    """Render every figure, its CSV and report.md into ``out_dir``.

    Args:
        matrix: Filled cross-evaluation matrix
        out_dir: Destination directory
        telemetry: Optional episode telemetry for the trajectory and attitude figures

    Returns:
        ReportBundle listing the written files
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    aggregated = aggregate(matrix)
    bundle = ReportBundle(output_dir=out_dir, aggregated=aggregated)

    for name, paths in (
        ("energy_by_spring", plot_energy_by_spring(matrix, out_dir)),
        ("energy_mean_std", plot_energy_mean_std(aggregated, out_dir)),
        ("policy_groups", plot_policy_groups(aggregated, out_dir)),
    ):
        bundle.files[f"{name}.svg"] = paths["svg"]
        bundle.files[f"{name}.csv"] = paths["csv"]
    if telemetry is not None and not telemetry.empty:
        for name, paths in (
            ("joint_trajectories", plot_joint_trajectories(telemetry, out_dir)),
            ("body_attitude", plot_body_attitude(telemetry, out_dir)),
        ):
            bundle.files[f"{name}.svg"] = paths["svg"]
            bundle.files[f"{name}.csv"] = paths["csv"]

    aggregated.to_csv(out_dir / "aggregate.csv")
    bundle.files["aggregate.csv"] = out_dir / "aggregate.csv"
    report = out_dir / "report.md"
    report.write_text(render_markdown(matrix, aggregated))
    bundle.files["report.md"] = report
    logger.info(f"Report written to {out_dir} ({len(bundle.files)} files)")
    return bundle
