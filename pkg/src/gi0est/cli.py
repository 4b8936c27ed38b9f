"""Command-line interface.

Exit codes: 0 success, 1 validation or usage error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import io
from .estimators import EstimatorConfig, Status, fit
from .harness import (
    DEFAULT_METHODS,
    paper_reproduction_preset,
    default_seif_grid,
    rank_thresholds,
    run_grid,
    seif_curve,
    threshold_comparison_preset,
    timing_benchmark,
)
from .model import ContaminationSpec, Gi0Error, TextureParams, sample, sample_contaminated
from .plots import render_panels
from .thresholds import ThresholdRule, select_threshold


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise UsageError(message)


def _csv_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _float_list(text: str) -> list[float]:
    return [float(t) for t in _csv_list(text)]


def build_parser() -> _Parser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="master seed")
    common.add_argument("--replicates", type=int, default=None, help="Monte Carlo replicates")
    common.add_argument("--out-dir", type=Path, default=Path("."), help="output directory")
    common.add_argument("--format", choices=("csv", "json"), default="csv", help="table format")

    p = _Parser(prog="gi0est", description="Single-look G0 texture estimation toolkit.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sample", parents=[common], help="draw a (contaminated) G0 sample")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--gamma", type=float, required=True)
    s.add_argument("--epsilon", type=float, default=None)
    s.add_argument("--c-value", type=float, default=None)
    s.add_argument("--output", type=Path, default=None, help="file name (default <out-dir>/sample.csv)")

    f = sub.add_parser("fit", parents=[common], help="fit one sample file")
    f.add_argument("path", type=Path)
    f.add_argument("--methods", type=_csv_list, default=list(DEFAULT_METHODS))
    f.add_argument("--threshold", default="u0", help="u0, u_q10, u_q20, u_Hill or u_AD")

    w = sub.add_parser("sweep", parents=[common], help="run an experiment grid")
    w.add_argument("--config", type=Path, default=None, help="grid JSON; defaults to the full reproduction grid")
    w.add_argument("--workers", type=int, default=1)
    w.add_argument("--full", action="store_true", help="1000 replicates per cell")

    e = sub.add_parser("seif", parents=[common], help="stylized empirical influence curves")
    e.add_argument("--alpha", type=float, default=-5.0)
    e.add_argument("--gamma", type=float, default=100.0)
    e.add_argument("--sizes", type=lambda t: [int(v) for v in _csv_list(t)], default=[25, 49, 81, 121])
    e.add_argument("--methods", type=_csv_list, default=list(DEFAULT_METHODS))
    e.add_argument("--c-grid", type=_float_list, default=None)
    e.add_argument("--points", type=int, default=40)

    t = sub.add_parser("thresholds", parents=[common], help="threshold-rule comparison")
    t.add_argument("--methods", type=_csv_list, default=["MDPD", "MLE"])
    t.add_argument("--rank-n", type=int, default=49)
    t.add_argument("--workers", type=int, default=1)

    r = sub.add_parser("roi-fit", parents=[common], help="texture estimates per region of interest")
    r.add_argument("--raster", type=Path, required=True)
    r.add_argument("--raster-format", choices=("csv-matrix", "raw-f32"), default="csv-matrix")
    r.add_argument("--rois", type=Path, default=None, help="ROI JSON (default: the built-in ten regions)")
    r.add_argument("--methods", type=_csv_list, default=list(io.TABLE1_METHODS))

    m = sub.add_parser("make-raster", parents=[common], help="write the synthetic corner-reflector raster and ROIs")
    m.add_argument("--raster-format", choices=("csv-matrix", "raw-f32"), default="csv-matrix")
    m.add_argument("--alpha", type=float, default=-4.0)
    m.add_argument("--gamma", type=float, default=1.0)

    b = sub.add_parser("timing", parents=[common], help="per-method fit times")
    b.add_argument("--n", type=int, default=500)
    b.add_argument("--alpha", type=float, default=-5.0)
    b.add_argument("--gamma", type=float, default=1.0)
    b.add_argument("--methods", type=_csv_list, default=list(DEFAULT_METHODS))
    return p


# ------------------------------------------------------------------ helpers


def read_sample_file(path: Path) -> np.ndarray:
    vals = []
    for line in path.read_text().splitlines():
        for tok in line.replace(";", ",").split(","):
            tok = tok.strip()
            if not tok:
                continue
            try:
                vals.append(float(tok))
            except ValueError:
                if vals:
                    raise Gi0Error(f"{path}: non-numeric value {tok!r}") from None
    return np.array(vals)


def _write_rows(rows, out_dir: Path, stem: str, fmt: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{stem}.{fmt}"
    (io.write_json if fmt == "json" else io.write_csv)(rows, path)
    return path


def _metric_panels(rows, metric: str):
    panels = []
    for a in sorted({r.alpha for r in rows}):
        series = {}
        for m in dict.fromkeys(r.method for r in rows):
            sizes = sorted({r.n for r in rows if r.method == m and r.alpha == a})
            ys = []
            for n in sizes:
                vals = [getattr(r, metric) for r in rows if r.method == m and r.alpha == a and r.n == n]
                vals = [v for v in vals if math.isfinite(v)]
                ys.append(float(np.mean(vals)) if vals else math.nan)
            series[m] = (sizes, ys)
        panels.append((f"alpha = {a:g}", series))
    return panels


def _sweep_plots(rows, out_dir: Path):
    labels = {"convergence_rate": "convergence rate", "bias_alpha": "bias of alpha", "mse_alpha": "MSE of alpha"}
    for metric, label in labels.items():
        render_panels(_metric_panels(rows, metric), "line", out_dir / f"{metric}.svg", xlabel="n", ylabel=label)
    times = {}
    for r in rows:
        times.setdefault(r.method, ([], []))[1].append(r.median_time_ms)
    render_panels([("median fit time per cell", times)], "box", out_dir / "time.svg", ylabel="ms", columns=1)


# ----------------------------------------------------------------- commands


def cmd_sample(a) -> int:
    p = TextureParams(a.alpha, a.gamma)
    seed = 0 if a.seed is None else a.seed
    if a.epsilon is not None or a.c_value is not None:
        if a.epsilon is None or a.c_value is None:
            raise Gi0Error("--epsilon and --c-value go together")
        s = sample_contaminated(a.n, p, ContaminationSpec(a.epsilon, a.c_value), seed)
    else:
        s = sample(a.n, p, seed)
    out = a.output or (a.out_dir / "sample.csv")
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("z\n" + "".join(format(v, ".17g") + "\n" for v in s.values))
    print(out)
    return 0


def cmd_fit(a) -> int:
    z = read_sample_file(a.path)
    if z.size < 2:
        print(f"InsufficientSample: {a.path} holds {z.size} value(s); at least 2 are needed", file=sys.stderr)
        return 1
    rule = ThresholdRule.from_label(a.threshold, seed=a.seed or 0)
    th = select_threshold(z, rule)
    out = []
    for label in a.methods:
        r = fit(th.excesses, EstimatorConfig.parse(label))
        out.append(
            {
                "method": r.method,
                "alpha": r.alpha,
                "gamma": r.gamma - th.u,
                "status": str(r.status),
                "objective": r.objective,
                "iterations": r.iterations,
                "wall_time_ms": r.wall_time * 1e3,
                "threshold": th.u,
                "n_used": len(th.excesses),
            }
        )
    if a.format == "json":
        print(json.dumps(out, indent=1))
    else:
        wr = csv.writer(sys.stdout, lineterminator="\n")
        wr.writerow(list(out[0]))
        for row in out:
            wr.writerow([v if isinstance(v, str) else format(v, ".10g") for v in row.values()])
    if any(o["status"] == str(Status.INSUFFICIENT) for o in out):
        print("InsufficientSample: too few values above the threshold", file=sys.stderr)
        return 1
    return 0


def cmd_sweep(a) -> int:
    grid = io.load_grid(a.config) if a.config else paper_reproduction_preset(full=a.full)
    if a.replicates is not None:
        grid.replicates = a.replicates
    elif a.full:
        grid.replicates = 1000
    if a.seed is not None:
        grid.master_seed = a.seed
    grid.__post_init__()
    rows = run_grid(grid, workers=a.workers)
    path = _write_rows(rows, a.out_dir, "metrics", a.format)
    _sweep_plots(rows, a.out_dir)
    print(path)
    return 0


def cmd_seif(a) -> int:
    p = TextureParams(a.alpha, a.gamma)
    grid = a.c_grid or default_seif_grid(a.points)
    a.out_dir.mkdir(parents=True, exist_ok=True)
    panels, lines = [], ["method,n,c,alpha_hat,status"]
    for n in a.sizes:
        series = {}
        for m in a.methods:
            cur = seif_curve(m, n, p, grid)
            series[cur.method] = (cur.c_grid, cur.estimates)
            lines += [f"{cur.method},{n},{c:.17g},{e:.17g},{s}" for c, e, s in zip(cur.c_grid, cur.estimates, cur.statuses)]
        panels.append((f"n = {n}", series))
    (a.out_dir / "seif.csv").write_text("\n".join(lines) + "\n")
    render_panels(panels, "line", a.out_dir / "seif.svg", xlabel="contaminant c", ylabel="alpha estimate")
    print(a.out_dir / "seif.csv")
    return 0


def cmd_thresholds(a) -> int:
    grids = threshold_comparison_preset(replicates=a.replicates or 200, methods=a.methods, master_seed=a.seed or 0)
    results = {}
    for g in grids:
        rows = run_grid(g, workers=a.workers)
        results[g.threshold_rule.label] = rows
        _write_rows(rows, a.out_dir, f"thresholds_{g.threshold_rule.label}", a.format)
    ranking = rank_thresholds(results, n=a.rank_n)
    lines = ["method,rule,mean_mse_alpha,mean_convergence,rank"]
    lines += [f"{r.method},{r.rule},{r.mean_mse_alpha:.17g},{r.mean_convergence:.17g},{r.rank}" for r in ranking]
    (a.out_dir / "threshold_ranking.csv").write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    return 0


def cmd_roi_fit(a) -> int:
    raster = io.load_raster(a.raster, a.raster_format)
    rois = io.load_rois(a.rois) if a.rois else io.default_rois()
    rows = io.roi_fit(raster, rois, a.methods)
    text = io.roi_table_csv(rows)
    a.out_dir.mkdir(parents=True, exist_ok=True)
    (a.out_dir / "roi_table.csv").write_text(text)
    sys.stdout.write(text)
    return 0


def cmd_make_raster(a) -> int:
    raster = io.synthetic_corner_raster(params=TextureParams(a.alpha, a.gamma), seed=a.seed or 0)
    a.out_dir.mkdir(parents=True, exist_ok=True)
    ext = "csv" if a.raster_format == "csv-matrix" else "f32"
    path = a.out_dir / f"raster.{ext}"
    io.write_raster(raster, path, a.raster_format)
    io.write_rois(io.default_rois(), a.out_dir / "rois.json")
    print(path)
    return 0


def cmd_timing(a) -> int:
    res = timing_benchmark(a.methods, a.n, TextureParams(a.alpha, a.gamma), a.replicates or 100, a.seed or 0)
    a.out_dir.mkdir(parents=True, exist_ok=True)
    lines = ["method,median_ms,q1_ms,q3_ms"] + [f"{k},{v.median_ms:.6g},{v.q1_ms:.6g},{v.q3_ms:.6g}" for k, v in res.items()]
    (a.out_dir / "timing.csv").write_text("\n".join(lines) + "\n")
    render_panels([(f"n = {a.n}", {k: ([], v.times_ms) for k, v in res.items()})], "box", a.out_dir / "timing.svg", ylabel="ms", columns=1)
    print("\n".join(lines))
    return 0


COMMANDS = {
    "sample": cmd_sample,
    "fit": cmd_fit,
    "sweep": cmd_sweep,
    "seif": cmd_seif,
    "thresholds": cmd_thresholds,
    "roi-fit": cmd_roi_fit,
    "make-raster": cmd_make_raster,
    "timing": cmd_timing,
}


def cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError:
        return 1
    except SystemExit as e:  # --help
        return int(e.code or 0)
    try:
        return COMMANDS[args.command](args)
    except (Gi0Error, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"io error: {e}", file=sys.stderr)
        return 2


def main():
    sys.exit(cli())


if __name__ == "__main__":
    main()
