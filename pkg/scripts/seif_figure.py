"""Stylized influence curves at alpha=-5, gamma=100 for n in {25, 49, 81, 121}."""
import sys

from gi0est.cli import cli

if __name__ == "__main__":
    sys.exit(cli(["seif", "--alpha", "-5", "--gamma", "100", *sys.argv[1:]]))
