"""Compare the five threshold rules for MDPD and MLE and rank them at n=49."""
import sys

from gi0est.cli import cli

if __name__ == "__main__":
    sys.exit(cli(["thresholds", *sys.argv[1:]]))
