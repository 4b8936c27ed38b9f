"""Per-method fit times on 100 identical samples of size 500."""
import sys

from gi0est.cli import cli

if __name__ == "__main__":
    sys.exit(cli(["timing", "--replicates", "100", *sys.argv[1:]]))
