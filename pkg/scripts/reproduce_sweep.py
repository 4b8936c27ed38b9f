"""Uncontaminated Monte Carlo sweep over the full (alpha, gamma, n) grid.

    python scripts/reproduce_sweep.py --out-dir runs/sweep --replicates 300
    python scripts/reproduce_sweep.py --out-dir runs/sweep --full --workers 8
"""
import sys

from gi0est.cli import cli

if __name__ == "__main__":
    sys.exit(cli(["sweep", *sys.argv[1:]]))
