"""Synthetic corner-reflector scene: write the raster, then the per-ROI estimate table.

    python scripts/roi_table.py --out-dir runs/roi --seed 0
"""
import argparse
import sys
from pathlib import Path

from gi0est.cli import cli

if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--out-dir", type=Path, default=Path("runs/roi"))
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args()
    code = cli(["make-raster", "--out-dir", str(a.out_dir), "--seed", str(a.seed)])
    if code == 0:
        code = cli(["roi-fit", "--raster", str(a.out_dir / "raster.csv"), "--rois", str(a.out_dir / "rois.json"), "--out-dir", str(a.out_dir)])
    sys.exit(code)
