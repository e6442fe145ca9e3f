#!/usr/bin/env python3

"""Create `.venv/` in the project root and install labeldp in editable mode."""

import argparse
import os
import pathlib
import subprocess
import sys
import venv

PROJECT_DIR = pathlib.Path(__file__).parent.parent.resolve(True)
VENV_DIR = PROJECT_DIR / ".venv"
EXTRAS = ("build", "dev", "docs")

if os.name == "nt":
    VENV_PYTHON = VENV_DIR / "Scripts" / "python.exe"
else:
    VENV_PYTHON = VENV_DIR / "bin" / "python"


def pip(*args: str) -> None:
    # pip reports its own errors on stderr
    result = subprocess.run([VENV_PYTHON.as_posix(), "-m", "pip", *args])
    if result.returncode:
        sys.exit(result.returncode)


def install(extras: set[str]) -> None:
    venv.create(VENV_DIR, with_pip=True)
    pip("install", "-U", "pip", "setuptools", "wheel")
    target = PROJECT_DIR.as_posix()
    if extras:
        target += f"[{','.join(sorted(extras))}]"
    pip("install", "-e", target)
    print(f"labeldp installed, run {VENV_PYTHON.parent / 'labeldp'} --help")


def parse_extras(args: argparse.Namespace) -> set[str]:
    extras = set(args.extras.split(",")) if args.extras else set()
    unknown = extras.difference(EXTRAS)
    if unknown:
        sys.exit(f"unknown extras: {', '.join(sorted(unknown))}")
    if args.all:
        return set(EXTRAS)
    if not args.no_build:
        extras.add("build")
    if args.dev:
        extras.update(("dev", "build"))
    if args.docs:
        extras.update(("docs", "build"))
    return extras


parser = argparse.ArgumentParser(description=__doc__)
parser.add_argument("--no-build", action="store_true", help="skip build dependencies")
parser.add_argument("--dev", action="store_true", help="install test, lint and typing tools")
parser.add_argument("--docs", action="store_true", help="install mkdocs and plugins")
parser.add_argument("-e", "--extras", help="comma-separated extras, among " + ", ".join(EXTRAS))
parser.add_argument("-a", "--all", action="store_true", help="install every extra")
parser.add_argument(
    "--show-python-path", action="store_true", help="print the virtualenv interpreter and exit"
)

if __name__ == "__main__":
    args = parser.parse_args()
    if args.show_python_path:
        print(VENV_PYTHON.as_posix())
        sys.exit(0)
    install(parse_extras(args))
