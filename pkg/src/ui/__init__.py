"""
User Interface Module
Command-line entry point for every subcommand.

Usage:
    python main.py simulate --config configs/model1.yaml
    # or
    python -m src.ui.cli simulate --config configs/model1.yaml
"""

from .cli import CLI, main

__all__ = ["CLI", "main"]
