"""Every package imports on its own, in a fresh interpreter."""

import subprocess
import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent.parent

PACKAGES = [
    "src.lob",
    "src.models",
    "src.models.presets",
    "src.likelihood",
    "src.simulation",
    "src.estimation",
    "src.evaluation",
    "src.tools",
    "src.guardrails",
    "src.config",
    "src.ui.cli",
]


@pytest.mark.parametrize("package", PACKAGES)
def test_imports_first(package):
    result = subprocess.run(
        [sys.executable, "-c", f"import {package}"], cwd=ROOT, capture_output=True, text=True, timeout=120
    )
    assert result.returncode == 0, result.stderr
