"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Criteria 3, 4 and 10 are expected to fail at their stated tolerances; the
printed detail carries the measured values.
"""

import math
import time

import numpy as np
import pytest
from scipy import integrate

from gi0est import io
from gi0est.estimators import EstimatorConfig, Status, fit, mdpd_integral, mom_estimate, pwm_estimate
from gi0est.harness import (
    GRID_ALPHAS,
    GRID_GAMMAS,
    DEFAULT_METHODS,
    ExperimentGrid,
    default_seif_grid,
    run_cell,
    run_grid,
    seif_curve,
    timing_benchmark,
)
from gi0est.model import ContaminationSpec, TextureParams, cdf, density, quantile, sample
from gi0est.thresholds import excesses
from oracles import OBJECTIVES, grid_zoom

pytestmark = pytest.mark.acceptance

METHODS = [EstimatorConfig.parse(m) for m in DEFAULT_METHODS]


def test_c01_oracle_equivalence(verdict):
    t0 = time.perf_counter()
    p = TextureParams(-5.0, 1.0)
    worst = {}
    for m, obj in OBJECTIVES.items():
        cfg = EstimatorConfig.parse(m)
        for k in range(20):
            z = sample(121, p, (1001, k)).values
            r = fit(z, cfg)
            a, g, _ = grid_zoom(obj, z)
            worst[m] = max(worst.get(m, 0.0), abs(r.alpha - a), abs(r.gamma - g))
    dt = time.perf_counter() - t0
    ok = max(worst.values()) <= 1e-4 and dt < 120
    detail = ", ".join(f"{m} {v:.1e}" for m, v in worst.items()) + f"; {dt:.0f}s"
    verdict("criterion 1 oracle equivalence", ok, detail)
    assert ok, detail


def test_c02_closed_form_closure(verdict):
    a1, g1 = mom_estimate(1.0, 3.0)
    a2, g2 = pwm_estimate(1.0, 0.2)
    err = max(abs(a1 + 3), abs(g1 - 2), abs(a2 + 3), abs(g2 - 2))
    ok = err <= 1e-12
    verdict("criterion 2 closed-form closure", ok, f"max error {err:.1e}")
    assert ok


def test_c03_consistency(verdict):
    t0 = time.perf_counter()
    bad, notes = [], []
    for a, g in [(-2.0, 10.0), (-5.0, 1.0), (-8.0, 0.1)]:
        grid = ExperimentGrid([a], [g], [121, 500], replicates=300, master_seed=3, methods=METHODS)
        rows = {(r.method, r.n): r for r in run_grid(grid)}
        for m in DEFAULT_METHODS:
            small, large = rows[m, 121], rows[m, 500]
            if not abs(large.bias_alpha) <= 0.5:
                bad.append(f"{m}@{a:g} bias {large.bias_alpha:+.2f}")
            if not large.mse_alpha < small.mse_alpha:
                bad.append(f"{m}@{a:g} MSE {large.mse_alpha:.2f} >= {small.mse_alpha:.2f}")
        notes.append(f"alpha {a:g}: worst |bias| {max(abs(rows[m, 500].bias_alpha) for m in DEFAULT_METHODS):.2f}")
    dt = time.perf_counter() - t0
    ok = not bad and dt < 600
    detail = "; ".join(notes) + f"; {dt:.0f}s" + ("; failing: " + ", ".join(bad) if bad else "")
    verdict("criterion 3 consistency", ok, detail)
    assert ok, detail


def test_c04_small_sample_bias(verdict):
    grid = ExperimentGrid([-8.0], list(GRID_GAMMAS), [25], replicates=300, master_seed=4, methods=METHODS)
    rows = run_grid(grid)
    bias = {}
    for r in rows:
        bias.setdefault(r.method, []).append(r.bias_alpha)
    low = {m: min(abs(b) for b in v) for m, v in bias.items()}
    ok = all(v > 1.5 for v in low.values())
    detail = "min over gamma of |bias|: " + ", ".join(f"{m} {v:.2f}" for m, v in low.items())
    verdict("criterion 4 small-sample bias", ok, detail)
    assert ok, detail


def test_c05_timing_order(verdict):
    res = timing_benchmark(DEFAULT_METHODS, 500, TextureParams(-5.0, 1.0), replicates=100, seed=5)
    med = {m: r.median_ms for m, r in res.items()}
    fastest = min(med, key=med.get)
    ok = fastest == "PWM"
    verdict("criterion 5 timing order", ok, ", ".join(f"{m} {v:.3f}ms" for m, v in med.items()))
    assert ok


def test_c06_robustness_ordering(verdict):
    t0 = time.perf_counter()
    p = TextureParams(-5.0, 100.0)
    grid = default_seif_grid()
    dev = {}
    for m in ("MDPD", "MLE", "MPLE"):
        cur = seif_curve(m, 49, p, grid)
        ref = cur.estimates[0]
        dev[m] = max(abs(e - ref) for c, e in zip(cur.c_grid, cur.estimates) if c >= 500)
    again = seif_curve("MDPD", 49, p, grid).estimates
    dt = time.perf_counter() - t0
    ok = dev["MDPD"] < dev["MLE"] and dev["MDPD"] < dev["MPLE"] and dt < 60
    ok = ok and again == seif_curve("MDPD", 49, p, grid).estimates
    verdict("criterion 6 robustness ordering", ok, ", ".join(f"{m} {v:.2f}" for m, v in dev.items()) + f"; {dt:.0f}s")
    assert ok


def test_c07_contamination_monte_carlo(verdict):
    grid = ExperimentGrid(
        [-5.0], [100.0], [121], replicates=200, master_seed=7,
        methods=[EstimatorConfig("MDPD"), EstimatorConfig("MLE")], contamination=ContaminationSpec(0.02, 1000.0),
    )
    bias = {r.method: r.bias_alpha for r in run_grid(grid)}
    ok = abs(bias["MDPD"]) < abs(bias["MLE"])
    verdict("criterion 7 contamination Monte Carlo", ok, f"MDPD {bias['MDPD']:+.3f}, MLE {bias['MLE']:+.3f}")
    assert ok


def test_c08_threshold_stability(verdict):
    p, u = TextureParams(-5.0, 1.0), 2.0
    a, g = [], []
    for k in range(100):
        r = fit(excesses(sample(5000, p, (8, k)), u).excesses, EstimatorConfig("MLE"))
        if r.status is Status.CONVERGED:
            a.append(r.alpha)
            g.append(r.gamma)
    a, g = np.array(a), np.array(g)
    se_a, se_g = a.std(ddof=1) / math.sqrt(a.size), g.std(ddof=1) / math.sqrt(g.size)
    ok = abs(a.mean() + 5) <= 3 * se_a and abs(g.mean() - 3) <= 3 * se_g
    detail = f"{a.size}/100 converged; alpha {a.mean():.3f} (SE {se_a:.3f}), gamma {g.mean():.3f} (SE {se_g:.3f})"
    verdict("criterion 8 threshold stability", ok, detail)
    assert ok


def _quad(f, g):
    return integrate.quad(f, 0, g, epsabs=0, epsrel=1e-12, limit=200)[0] + integrate.quad(f, g, np.inf, epsabs=0, epsrel=1e-12, limit=200)[0]


def test_c09_numerical_invariants(verdict):
    params = [TextureParams(a, g) for a in GRID_ALPHAS for g in GRID_GAMMAS]
    u = np.random.default_rng(9).random(2000)
    roundtrip = max(float(np.max(np.abs(cdf(quantile(u, p), p) - u))) for p in params)
    norm = max(abs(_quad(lambda z: density(z, p), p.gamma) - 1) for p in params)
    mdpd = 0.0
    for p in params:
        for w in (0.05, 0.1, 0.5):
            q = _quad(lambda z: density(z, p) ** (1 + w), p.gamma)
            mdpd = max(mdpd, abs(mdpd_integral(p, w) / q - 1))

    grid = ExperimentGrid([-2.0, -5.0], [1.0], [25, 81], replicates=40, master_seed=9, methods=[EstimatorConfig.parse(m) for m in ("MLE", "PWM", "MDPD")])
    rows = run_grid(grid, workers=1)
    decomp = 0.0
    for c, a, g, n in grid.cells():
        for m, reps in run_cell(grid, c, a, g, n).items():
            conv = np.array([r.alpha_hat for r in reps if r.status is Status.CONVERGED])
            row = next(r for r in rows if r.method == m and r.alpha == a and r.n == n)
            decomp = max(decomp, abs(row.mse_alpha - ((conv.mean() - a) ** 2 + conv.var())) / row.mse_alpha)

    def blank(rs):
        for r in rs:
            r.median_time_ms = 0.0
        return io.metrics_csv(rs).encode()

    same = blank(rows) == blank(run_grid(grid, workers=2)) == blank(run_grid(grid, workers=3))
    ok = roundtrip <= 1e-10 and norm <= 1e-8 and mdpd <= 1e-8 and decomp <= 1e-9 and same
    detail = f"roundtrip {roundtrip:.1e}, normalization {norm:.1e}, MDPD integral {mdpd:.1e}, MSE decomposition {decomp:.1e}, worker determinism {same}"
    verdict("criterion 9 numerical invariants", ok, detail)
    assert ok


def test_c10_roi_workflow(verdict):
    rois = io.default_rois()
    big = [r for r in rois if r.size >= 600]
    rows = {r.roi: r for r in io.roi_fit(io.synthetic_corner_raster(seed=0), big)}
    misses = [f"{name} {m} {a:.2f}" for name, row in rows.items() for m, a in row.estimates.items() if not abs(a + 4) <= 0.8]

    # supplementary: mean estimate over 50 seeds on the large regions, and the small-region clamp rate
    clamped, means = 0, {}
    small = rois[0]
    for s in range(50):
        raster = io.synthetic_corner_raster(seed=s)
        (row,) = io.roi_fit(raster, [small])
        clamped += any(a in (-0.1, -20.0) for a in row.estimates.values())
        for r in io.roi_fit(raster, big):
            for m, a in r.estimates.items():
                means.setdefault((r.roi, m), []).append(a)
    rate = clamped / 50
    worst_mean = max(abs(np.mean(v) + 4) for v in means.values())
    ok = not misses and rate >= 0.30
    detail = f"seed 0 misses: {misses or 'none'}; clamp rate {rate:.0%} on {small.size}-pixel ROI; 50-seed worst |mean - alpha| {worst_mean:.2f}"
    verdict("criterion 10 ROI workflow", ok, detail)
    assert ok, detail
