"""
Setup script for DriveState

Bootstraps a working checkout: installs the pinned numeric stack, writes a
.env from the template, creates the run and data folders and optionally
generates the easy4 demo corpus so the CLI has something to train on.
"""

import argparse
import importlib
import shutil
import subprocess
import sys
from pathlib import Path

REQUIRED_MODULES = ("dotenv", "numpy", "scipy", "sklearn", "matplotlib", "pytest")
WORK_DIRS = ("logs", "runs", "data")
DEMO_CORPUS = Path("data") / "easy4"


def check_interpreter() -> bool:
    """Refuse interpreters older than 3.10."""
    if sys.version_info < (3, 10):
        print(f"❌ DriveState needs Python 3.10+, found {sys.version.split()[0]}")
        return False
    print(f"✅ Python {sys.version.split()[0]}")
    return True


def install_requirements() -> bool:
    print("📦 Installing pinned requirements...")
    result = subprocess.run([sys.executable, "-m", "pip", "install", "-r", "requirements.txt"])
    if result.returncode != 0:
        print("❌ pip exited with status", result.returncode)
        return False
    return True


def write_env(force: bool) -> bool:
    """Copy .env.example to .env unless one is already there."""
    template, target = Path(".env.example"), Path(".env")
    if not template.exists():
        print("❌ .env.example is missing from the checkout")
        return False
    if target.exists() and not force:
        print("⚠️  Keeping existing .env (pass --force-env to replace it)")
        return True
    shutil.copy(template, target)
    print("✅ .env written with the default seed, runs folder and frame interval")
    return True


def make_work_dirs() -> bool:
    for name in WORK_DIRS:
        Path(name).mkdir(parents=True, exist_ok=True)
    print(f"✅ Folders ready: {', '.join(WORK_DIRS)}")
    return True


def check_imports() -> bool:
    missing = []
    for module in REQUIRED_MODULES:
        try:
            importlib.import_module(module)
        except ImportError:
            missing.append(module)
    if missing:
        print(f"❌ Could not import: {', '.join(missing)}")
        return False

    import matplotlib
    matplotlib.use("Agg")
    print("✅ Numeric stack importable, matplotlib on the Agg backend")
    return True


def generate_demo_corpus() -> bool:
    """Simulate the easy4 preset into data/easy4 through the library itself."""
    if (DEMO_CORPUS / "spec.json").exists():
        print(f"⚠️  {DEMO_CORPUS} already holds a corpus, leaving it alone")
        return True

    from app.core.config import default_seed
    from app.domain.io import write_dataset
    from app.synthdata.generator import generate_from_spec
    from app.synthdata.specs import preset, save_corpus_spec

    spec = preset("easy4").with_seed(default_seed())
    corpus = generate_from_spec(spec, 10)
    write_dataset(corpus, DEMO_CORPUS)
    save_corpus_spec(spec, DEMO_CORPUS / "spec.json")
    print(f"✅ {len(corpus)} demo sequences written to {DEMO_CORPUS}")
    return True


def main():
    parser = argparse.ArgumentParser(description="Prepare a DriveState checkout")
    parser.add_argument("--skip-install", action="store_true", help="do not run pip")
    parser.add_argument("--force-env", action="store_true", help="overwrite an existing .env")
    parser.add_argument("--demo", action="store_true", help="generate the easy4 demo corpus")
    args = parser.parse_args()

    print("🚗 Setting up DriveState...\n")

    steps = [("Interpreter", check_interpreter)]
    if not args.skip_install:
        steps.append(("Requirements", install_requirements))
    steps += [
        ("Environment file", lambda: write_env(args.force_env)),
        ("Working folders", make_work_dirs),
        ("Imports", check_imports),
    ]
    if args.demo:
        steps.append(("Demo corpus", generate_demo_corpus))

    failed = []
    for label, step in steps:
        print(f"\n▶ {label}")
        if not step():
            failed.append(label)
            break

    print("\n" + "=" * 50)
    if failed:
        print(f"❌ Setup stopped at: {failed[0]}")
        sys.exit(1)

    print("🎉 Ready.")
    print("\n📝 Try:")
    print(f"   python main.py train --data {DEMO_CORPUS}")
    print("   python main.py sweep --data data/easy4 --grid \"M=2,4;Q=8,16\"")
    print("   pytest -m 'not slow'")


if __name__ == "__main__":
    main()
