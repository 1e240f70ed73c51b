"""Write a small hand-made cross-evaluation matrix for trying out the report.

Creates a 3 x 3 matrix (springs S1, S5, S8 x one policy per spring) with a U-shaped
energy profile, then renders the report bundle next to it.
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from src.evalsuite.cross_eval import CellStats, CrossEvalMatrix  # noqa: E402
from src.reporting.report import build_report  # noqa: E402
from src.schemas import STIFFNESS_LADDER  # noqa: E402

# Rows: evaluated spring; columns: policy trained on that spring
SAMPLE_ENERGY = {
    "S1": {"pi_S1": 41.5, "pi_S5": 44.0, "pi_S8": 47.2},
    "S5": {"pi_S1": 33.1, "pi_S5": 30.4, "pi_S8": 34.9},
    "S8": {"pi_S1": 37.8, "pi_S5": 35.6, "pi_S8": 36.3},
}


def generate_matrix() -> CrossEvalMatrix:
    """Build the sample matrix from SAMPLE_ENERGY."""
    cells = []
    for spring_id, row in SAMPLE_ENERGY.items():
        for policy_id, energy in row.items():
            cells.append(
                CellStats(
                    spring_id=spring_id,
                    stiffness_n_per_m=STIFFNESS_LADDER[spring_id],
                    policy_id=policy_id,
                    policy_stiffness_n_per_m=STIFFNESS_LADDER[policy_id.split("_")[1]],
                    mean_j_per_m=energy,
                    std_j_per_m=0.05 * energy,
                    n=10,
                    mean_abs_j_per_m=1.4 * energy,
                    fall_rate=0.0,
                    mean_speed=0.5,
                    discarded=0,
                )
            )
    return CrossEvalMatrix.from_cells(cells)


if __name__ == "__main__":
    output_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("runs/sample")

    print("Generating sample cross-evaluation matrix...")
    matrix = generate_matrix()
    matrix_path = matrix.to_csv(output_dir / "cross_eval_matrix.csv")
    print(f"✓ Matrix written to {matrix_path}")

    bundle = build_report(matrix, output_dir / "report")
    for path in bundle.paths:
        print(f"✓ {path}")
    print(f"\nMinimum-energy spring: {bundle.aggregated.argmin_spring}")
