"""Energy metric and cross-evaluation of policies over foot springs."""

from src.evalsuite.cross_eval import (
    AggregateResult,
    CellStats,
    CrossEvalMatrix,
    aggregate,
    cross_matrix,
    policy_groups,
    record_telemetry,
    run_cell,
    training_stiffness,
)
from src.evalsuite.energy import (
    WORK_CONVENTIONS,
    EnergyRecord,
    create_convention,
    energy_per_meter,
    mechanical_work,
)

__all__ = [
    'AggregateResult',
    'CellStats',
    'CrossEvalMatrix',
    'EnergyRecord',
    'WORK_CONVENTIONS',
    'aggregate',
    'create_convention',
    'cross_matrix',
    'energy_per_meter',
    'mechanical_work',
    'policy_groups',
    'record_telemetry',
    'run_cell',
    'training_stiffness',
]
