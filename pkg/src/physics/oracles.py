"""Analytic reference rigs for the physics core.

Each oracle builds a small rig, runs it and compares against a closed-form answer.
The CLI ``physics-test`` command and the test-suite both run them.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional

import numpy as np
from scipy.signal import find_peaks

from src.control.actuation import PdGains, pd_torque
from src.physics.contact import spring_foot_force
from src.physics.robot import (
    ACTUATED,
    NUM_COORDS,
    SLIDERS,
    RobotModel,
    RobotState,
    mass_matrix,
)
from src.physics.simulator import WorldParams, semi_implicit_euler, step, total_mechanical_energy
from src.schemas import ActuationConfig, PhysicsConfig, RobotModelConfig, SpringFootParams

logger = logging.getLogger(__name__)


@dataclass
class OracleResult:
    name: str
    passed: bool
    measured: float
    expected: float
    tolerance: float
    detail: str = ""

    def summary(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return (
            f"[{mark}] {self.name}: measured {self.measured:.6g}, expected {self.expected:.6g} "
            f"(tolerance {self.tolerance:.3g}) {self.detail}".rstrip()
        )


def energy_drift_rate(times: np.ndarray, energy: np.ndarray) -> float:
    """Slope of the least-squares line through E(t)/E(0), per second."""
    relative = np.asarray(energy) / energy[0]
    slope, _ = np.polyfit(np.asarray(times), relative, 1)
    return float(abs(slope))


def free_fall(duration: float = 0.5, physics: Optional[PhysicsConfig] = None) -> OracleResult:
    """Whole robot dropped from rest far above the ground."""
    physics = physics or PhysicsConfig()
    model = RobotModel.from_config(RobotModelConfig(), SpringFootParams.from_ladder("S5"))
    state = RobotState.standing(model, 1, clearance=10.0)
    steps = int(round(duration / physics.dt))
    z0 = float(state.base_z[0])
    for _ in range(steps):
        state = step(state, np.zeros((1, 4)), physics, model)

    g = -physics.gravity[1]
    expected = -0.5 * g * duration**2
    measured = float(state.base_z[0]) - z0
    error = abs(measured - expected) / abs(expected)
    return OracleResult(
        "free_fall", error < 0.01, measured, expected, 0.01, f"relative error {error:.2e}"
    )


def spring_mass_oscillator(
    stiffness: float = 14500.0,
    mass: float = 10.0,
    compression: float = 0.01,
    dt: float = 0.001,
    duration: float = 2.0,
) -> Dict[str, OracleResult]:
    """Undamped mass on a foot spring: frequency and energy drift."""
    spring = SpringFootParams(stiffness=stiffness, damping=0.0, stiffness_id="oracle")
    steps = int(round(duration / dt))
    x = np.array([compression])
    v = np.zeros(1)
    trace = np.zeros(steps + 1)
    energy = np.zeros(steps + 1)
    trace[0] = compression
    energy[0] = 0.5 * stiffness * compression**2
    for n in range(1, steps + 1):
        acceleration = -spring_foot_force(x, v, spring) / mass
        x, v = semi_implicit_euler(x, v, acceleration, dt)
        trace[n] = x[0]
        energy[n] = 0.5 * mass * v[0] ** 2 + 0.5 * stiffness * x[0] ** 2

    times = np.arange(steps + 1) * dt
    peaks, _ = find_peaks(trace)
    expected_frequency = np.sqrt(stiffness / mass) / (2.0 * np.pi)
    if len(peaks) >= 2:
        measured_frequency = (len(peaks) - 1) / (times[peaks[-1]] - times[peaks[0]])
    else:
        measured_frequency = 0.0
    frequency_error = abs(measured_frequency - expected_frequency) / expected_frequency
    drift = energy_drift_rate(times, energy)
    return {
        "oscillator_frequency": OracleResult(
            "oscillator_frequency",
            frequency_error < 0.01,
            measured_frequency,
            expected_frequency,
            0.01,
            f"{len(peaks)} peaks",
        ),
        "oscillator_energy_drift": OracleResult(
            "oscillator_energy_drift", drift < 0.01, drift, 0.0, 0.01, "per second"
        ),
    }


def two_link_closed_form(model: RobotModel, knee: float, slider: float = 0.0) -> np.ndarray:
    """Textbook inertia matrix of the front hip-knee chain (thigh rod, shank rod, foot point)."""
    m1, m2, mf = model.body_mass[0, 3], model.body_mass[0, 4], model.body_mass[0, 7]
    i1, i2 = model.body_inertia[0, 3], model.body_inertia[0, 4]
    l1 = model.thigh_length[0]
    lc1 = 0.5 * l1
    lc2 = 0.5 * model.shank_length[0]
    lf = model.shank_length[0] + model.foot.free_length - slider
    c = np.cos(knee)
    m11 = (
        i1
        + m1 * lc1**2
        + i2
        + m2 * (l1**2 + lc2**2 + 2.0 * l1 * lc2 * c)
        + mf * (l1**2 + lf**2 + 2.0 * l1 * lf * c)
    )
    m12 = i2 + m2 * (lc2**2 + l1 * lc2 * c) + mf * (lf**2 + l1 * lf * c)
    m22 = i2 + m2 * lc2**2 + mf * lf**2
    return np.array([[m11, m12], [m12, m22]])


def two_link_mass_matrix(samples: int = 16, seed: int = 0) -> OracleResult:
    """Front-leg block of M(q) against the closed form at random configurations."""
    base = RobotModel.from_config(RobotModelConfig(armature=0.0), SpringFootParams.from_ladder("S5"))
    rng = np.random.default_rng(seed)
    q = rng.uniform(-1.5, 1.5, (samples, NUM_COORDS))
    q[:, SLIDERS] = rng.uniform(0.0, 0.03, (samples, 2))
    matrices = mass_matrix(base, q)
    worst = 0.0
    for n in range(samples):
        expected = two_link_closed_form(base, q[n, 4], q[n, 7])
        block = matrices[n, 3:5, 3:5]
        worst = max(worst, float(np.max(np.abs(block - expected)) / np.max(np.abs(expected))))
    return OracleResult(
        "two_link_mass_matrix", worst < 1e-10, worst, 0.0, 1e-10, f"{samples} configurations"
    )


def passivity(duration: float = 1.0, seed: int = 0) -> OracleResult:
    """Zero gravity, zero torque, undamped springs, no contact: energy is conserved."""
    physics = PhysicsConfig(dt=0.001, substeps=10, gravity=(0.0, 0.0))
    spring = SpringFootParams(stiffness=14500.0, damping=0.0, stiffness_id="oracle")
    model = RobotModel.from_config(RobotModelConfig(), spring)
    rng = np.random.default_rng(seed)
    state = RobotState.standing(model, 1, clearance=5.0)
    q = state.q.copy()
    qd = np.zeros_like(q)
    qd[:, 2] = 0.2
    qd[:, ACTUATED] = rng.uniform(-0.5, 0.5, (1, 4))
    state = RobotState.from_coordinates(q, qd)
    world = WorldParams.nominal(physics, 1)

    steps = int(round(duration / physics.dt))
    times = np.arange(steps + 1) * physics.dt
    energy = np.zeros(steps + 1)
    energy[0] = total_mechanical_energy(state, model, gravity=physics.gravity)[0]
    for n in range(1, steps + 1):
        state = step(state, np.zeros((1, 4)), physics, model, world)
        energy[n] = total_mechanical_energy(state, model, gravity=physics.gravity)[0]
    drift = energy_drift_rate(times, energy)
    return OracleResult("passivity", drift < 0.01, drift, 0.0, 0.01, "per second")


def pd_step_response(
    inertia: float = 1.0,
    step_size: float = 0.3,
    duration: float = 6.0,
    bound: float = 4.0,
    actuation: Optional[ActuationConfig] = None,
) -> OracleResult:
    """Single joint under the PD law with a zero-order hold at the control period."""
    actuation = actuation or ActuationConfig()
    gains = PdGains.from_config(actuation)
    dt = PhysicsConfig().dt
    steps = int(round(duration / dt))
    q = np.zeros(1)
    qd = np.zeros(1)
    trace = np.zeros(steps + 1)
    for n in range(1, steps + 1):
        torque = pd_torque(np.array([step_size]), q, qd, gains, RobotModelConfig().torque_limit)
        q, qd = semi_implicit_euler(q, qd, torque / inertia, dt)
        trace[n] = q[0]

    if not np.all(np.isfinite(trace)):
        return OracleResult("pd_step_response", False, float("inf"), bound, bound, "diverged")
    outside = np.flatnonzero(np.abs(trace - step_size) > 0.02 * step_size)
    settling = float((outside[-1] + 1) * dt) if outside.size else 0.0
    return OracleResult(
        "pd_step_response", settling < bound, settling, bound, bound, "2% settling time in s"
    )


ORACLES: Dict[str, Callable[[], object]] = {
    'free_fall': free_fall,
    'spring_mass_oscillator': spring_mass_oscillator,
    'two_link_mass_matrix': two_link_mass_matrix,
    'passivity': passivity,
    'pd_step_response': pd_step_response,
}


def run_oracle_battery() -> List[OracleResult]:
    """Run every oracle and return the flattened results."""
    results: List[OracleResult] = []
    for name, oracle in ORACLES.items():
        logger.info(f"Running physics oracle: {name}")
        outcome = oracle()
        results.extend(outcome.values() if isinstance(outcome, dict) else [outcome])
    failed = [result.name for result in results if not result.passed]
    if failed:
        logger.warning(f"Physics oracles failed: {failed}")
    return results
