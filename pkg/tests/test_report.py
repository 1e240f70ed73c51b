"""Tests for the report bundle."""

import re

import numpy as np
import pandas as pd
import pytest

from src.evalsuite.cross_eval import aggregate
from src.reporting.plots import format_value
from src.reporting.report import build_report, render_markdown, trend_holds


@pytest.fixture
def u_shaped(make_matrix):
    values = {}
    for spring_id, base in (("S1", 300.0), ("S5", 180.0), ("S8", 220.0)):
        for offset, policy_id in enumerate(("pi_S1", "pi_S5", "pi_S8")):
            values[(spring_id, policy_id)] = base + 7.25 * offset
    return make_matrix(values)


def fake_telemetry(steps=20):
    time = np.arange(1, steps + 1) * 0.02
    frame = {"time": time, "roll": 0.0, "pitch": 0.1 * np.sin(time), "yaw": 0.0}
    for joint in ("hip_front", "knee_front", "hip_rear", "knee_rear", "slider_front", "slider_rear"):
        frame[f"{joint}_q"] = np.cos(time)
    return pd.DataFrame(frame)


def test_bundle_files(tmp_path, u_shaped):
    bundle = build_report(u_shaped, tmp_path)
    names = {path.name for path in bundle.paths}
    assert names == {
        "energy_by_spring.svg",
        "energy_by_spring.csv",
        "energy_mean_std.svg",
        "energy_mean_std.csv",
        "policy_groups.svg",
        "policy_groups.csv",
        "aggregate.csv",
        "report.md",
    }
    assert all(path.exists() for path in bundle.paths)


def test_telemetry_adds_trajectory_figures(tmp_path, u_shaped):
    bundle = build_report(u_shaped, tmp_path, telemetry=fake_telemetry())
    names = {path.name for path in bundle.paths}
    assert {"joint_trajectories.svg", "joint_trajectories.csv", "body_attitude.svg", "body_attitude.csv"} <= names


def test_bar_labels_appear_in_sibling_csv(tmp_path, u_shaped):
    build_report(u_shaped, tmp_path)
    for name in ("energy_by_spring", "energy_mean_std"):
        svg = (tmp_path / f"{name}.svg").read_text()
        csv = (tmp_path / f"{name}.csv").read_text()
        labels = re.findall(r">\s*([0-9]+(?:\.[0-9]+)?)\s*</text>", svg)
        assert labels
        for label in labels:
            assert label in csv


def test_figures_are_reproducible(tmp_path, u_shaped):
    first = build_report(u_shaped, tmp_path / "a")
    second = build_report(u_shaped, tmp_path / "b")
    for name in ("energy_by_spring.svg", "energy_mean_std.svg", "policy_groups.svg"):
        assert first.files[name].read_bytes() == second.files[name].read_bytes()


def test_markdown_separates_reference_from_achieved(u_shaped):
    text = render_markdown(u_shaped, aggregate(u_shaped))
    assert "not reproduced" in text
    assert "minimum-energy spring: S5" in text
    assert "interior-minimum trend: holds" in text


def test_trend_flag_for_monotone_matrix(make_matrix):
    matrix = make_matrix({("S1", "pi_S1"): 100.0, ("S5", "pi_S1"): 200.0, ("S8", "pi_S1"): 300.0})
    aggregated = aggregate(matrix)
    assert not trend_holds(aggregated)
    assert "NOT observed" in render_markdown(matrix, aggregated)


def test_format_value():
    assert format_value(160.0) == "160"
    assert format_value(1234567.0) == "1.23457e+06"
