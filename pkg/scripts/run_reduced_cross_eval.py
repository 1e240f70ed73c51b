"""Reduced cross-evaluation campaign.

Trains policies for the soft (S1), intermediate (S5) and stiff (S8) feet with three
seeds each, keeps the best seed per spring, cross-evaluates the three policies on the
three springs and renders the report. Expect roughly a desktop-day of CPU time.

Usage:
    python scripts/run_reduced_cross_eval.py [configs/reduced.yaml] [--iterations N]
"""

import argparse
import logging
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from src.config import get_settings, load_config, resolve_output_dir, write_provenance  # noqa: E402
from src.workflow.executor import CampaignExecutor  # noqa: E402


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("config", nargs="?", default="configs/reduced.yaml")
    parser.add_argument("--iterations", type=int, help="Override learner.iterations")
    parser.add_argument("--output-dir")
    args = parser.parse_args()

    settings = get_settings()
    logging.basicConfig(
        level=settings.log_level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    )

    config = load_config(args.config)
    if args.iterations is not None:
        learner = config.learner.model_copy(update={"iterations": args.iterations})
        config = config.model_copy(update={"learner": learner})
    stiffness_ids = [entry.id for entry in config.sweep.stiffness]
    out_dir = resolve_output_dir(config, args.output_dir) / config.run_id
    write_provenance(config, out_dir, list(config.sweep.seeds), " ".join(sys.argv))

    print("=" * 60)
    print(f"Reduced campaign: springs {stiffness_ids}, seeds {list(config.sweep.seeds)}")
    print(f"Orchestrator: {settings.orchestrator}, workers: {settings.threads}")
    print("=" * 60)

    executor = CampaignExecutor(settings.orchestrator)
    result = executor.campaign(
        config, stiffness_ids, list(config.sweep.seeds), out_dir, workers=settings.threads
    )

    print(f"\n✓ Matrix: {result['matrix_path']}")
    for path in result.get("report_files", []):
        print(f"✓ {path}")
    print(f"\nMinimum-energy spring: {result.get('argmin_spring')}")


if __name__ == "__main__":
    main()
