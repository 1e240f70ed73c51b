"""Verify that the compliant-foot lab is set up correctly.

This script checks:
1. Required packages import
2. The default configuration loads
3. The physics oracle battery passes
4. The output directory is writable
"""

import importlib
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

REQUIRED_PACKAGES = [
    "numpy",
    "scipy",
    "pandas",
    "pydantic",
    "pydantic_settings",
    "prefect",
    "matplotlib",
    "ruamel.yaml",
]


def check_packages():
    """Check that every runtime dependency imports."""
    print("Checking packages...")
    missing = []
    for name in REQUIRED_PACKAGES:
        try:
            importlib.import_module(name)
        except ImportError as e:
            missing.append(name)
            print(f"✗ {name}: {e}")
    if missing:
        print("  Install with: pip install -e .")
        return False
    print(f"✓ {len(REQUIRED_PACKAGES)} packages available")
    return True


def check_config():
    """Check that the shipped default configuration validates."""
    print("\nChecking configuration...")
    from src.config import load_config
    from src.exceptions import LabError

    path = Path(__file__).resolve().parent.parent / "configs" / "default.yaml"
    try:
        config = load_config(path)
    except LabError as e:
        print(f"✗ {path} is invalid: {e}")
        return False
    print(f"✓ {path.name} loads ({len(config.sweep.stiffness)} springs)")
    return True


def check_physics():
    """Run the physics oracle battery."""
    print("\nChecking physics...")
    from src.physics.oracles import run_oracle_battery

    results = run_oracle_battery()
    for result in results:
        mark = "✓" if result.passed else "✗"
        print(f"{mark} {result.summary()}")
    return all(result.passed for result in results)


def check_output_dir():
    """Check that artifacts can be written."""
    print("\nChecking output directory...")
    from src.config import get_settings

    target = Path(get_settings().output_dir or "runs")
    try:
        target.mkdir(parents=True, exist_ok=True)
        probe = target / ".write_probe"
        probe.write_text("ok")
        probe.unlink()
    except OSError as e:
        print(f"✗ {target} is not writable: {e}")
        return False
    print(f"✓ {target} is writable")
    return True


def main():
    """Run all checks."""
    print("=" * 60)
    print("Compliant-Foot Lab - Setup Verification")
    print("=" * 60)

    checks = [
        check_packages,
        check_config,
        check_physics,
        check_output_dir,
    ]

    results = []
    for check in checks:
        results.append(check())
        if check is check_packages and not results[-1]:
            break

    print("\n" + "=" * 60)
    if all(results) and len(results) == len(checks):
        print("SUCCESS! All checks passed.")
        print("\nNext steps:")
        print("1. Train a policy: cflab train --stiffness-id S5 --seed 0")
        print("2. Try the report: python scripts/generate_sample_matrix.py")
        print("3. Reduced campaign: python scripts/run_reduced_cross_eval.py")
    else:
        print("FAILED! Some checks did not pass.")
        sys.exit(1)

    print("=" * 60)


if __name__ == "__main__":
    main()
