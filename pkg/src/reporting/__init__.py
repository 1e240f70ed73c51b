"""Report figures, source CSVs and the markdown summary."""

from src.reporting.plots import (
    plot_body_attitude,
    plot_energy_by_spring,
    plot_energy_mean_std,
    plot_joint_trajectories,
    plot_policy_groups,
)
from src.reporting.report import REFERENCE_LINES, ReportBundle, build_report, trend_holds

__all__ = [
    'REFERENCE_LINES',
    'ReportBundle',
    'build_report',
    'plot_body_attitude',
    'plot_energy_by_spring',
    'plot_energy_mean_std',
    'plot_joint_trajectories',
    'plot_policy_groups',
    'trend_holds',
]
