"""
Main Entry Point
Runs the toolkit's subcommands.

Usage:
  python main.py simulate --config configs/model1.yaml --seed 7
  python main.py estimate --config configs/model1.yaml --log outputs/simulate_model1_seed7.jsonl
  python main.py likelihood --config configs/model1.yaml --log outputs/simulate_model1_seed7.jsonl
  python main.py impact --config configs/impact.yaml --reps 2000
  python main.py liquidate --config configs/liquidation.yaml
  python main.py scaling-check --config configs/model2.yaml
  python main.py lyapunov-check --config configs/model2.yaml
  python main.py validate-log --log data/sample_real_log.jsonl --real
"""

import sys

from src.ui.cli import main

if __name__ == "__main__":
    sys.exit(main())
