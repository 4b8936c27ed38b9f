"""Monte Carlo experiments: estimator sweeps, SEIF curves and timings.

Replicate ``r`` of grid cell ``c`` draws its sample from the stream keyed by
``(master_seed, c, r)``, where cells enumerate (alpha, gamma, n) in grid
order.  Every method sees the same samples, and results do not depend on how
cells are spread over worker processes.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .estimators import EstimatorConfig, FitResult, Status, fit
from .model import (
    ContaminationSpec,
    Gi0Error,
    TextureParams,
    sample,
    sample_contaminated,
    stylized_sample,
)
from .thresholds import STANDARD_RULES, ThresholdRule, select_threshold

GRID_ALPHAS = (-8.0, -5.0, -2.0)
GRID_GAMMAS = (0.1, 1.0, 10.0, 100.0)
GRID_SIZES = (25, 49, 81, 121, 500)
DEFAULT_METHODS = ("MGF(ADR)", "MDPD", "MPLE", "LME", "MLE", "PWM")


@dataclass
class ExperimentGrid:
    alphas: list[float]
    gammas: list[float]
    sizes: list[int]
    replicates: int = 300
    master_seed: int = 0
    contamination: ContaminationSpec | None = None
    methods: list[EstimatorConfig] = field(default_factory=lambda: [EstimatorConfig.parse(m) for m in DEFAULT_METHODS])
    threshold_rule: ThresholdRule = field(default_factory=ThresholdRule)

    def __post_init__(self):
        if self.replicates < 1:
            raise Gi0Error("replicates must be at least 1")
        if not (self.alphas and self.gammas and self.sizes and self.methods):
            raise Gi0Error("grid lists must be nonempty")
        for a, g in itertools.product(self.alphas, self.gammas):
            TextureParams(a, g)
        if any(int(n) != n or n < 1 for n in self.sizes):
            raise Gi0Error("sizes must be positive integers")
        if self.master_seed < 0:
            raise Gi0Error("master_seed must be nonnegative")

    def cells(self):
        """(cell index, alpha, gamma, n) in a fixed order."""
        for c, (a, g, n) in enumerate(itertools.product(self.alphas, self.gammas, self.sizes)):
            yield c, a, g, int(n)

    @property
    def n_cells(self) -> int:
        return len(self.alphas) * len(self.gammas) * len(self.sizes)


@dataclass
class MetricsRow:
    method: str
    alpha: float
    gamma: float
    n: int
    convergence_rate: float
    bias_alpha: float
    mse_alpha: float
    bias_gamma: float
    mse_gamma: float
    median_time_ms: float
    replicates_used: int

    @property
    def flagged(self) -> bool:
        """True when no replicate converged and the error metrics are undefined."""
        return self.replicates_used == 0


@dataclass
class Replicate:
    """One fit inside a cell; ``gamma_hat`` is already shifted back by the threshold."""

    alpha_hat: float
    gamma_hat: float
    status: Status
    time_ms: float
    threshold: float = 0.0


@dataclass
class SeifCurve:
    method: str
    n: int
    params: TextureParams
    c_grid: list[float]
    estimates: list[float]
    statuses: list[str] = field(default_factory=list)


def replicate_key(master_seed: int, cell: int, rep: int) -> tuple[int, int, int]:
    return (int(master_seed), int(cell), int(rep))


def draw_replicate(grid: ExperimentGrid, cell: int, rep: int, p: TextureParams, n: int):
    key = replicate_key(grid.master_seed, cell, rep)
    if grid.contamination is None:
        return sample(n, p, key)
    return sample_contaminated(n, p, grid.contamination, key)


def _rule_for_replicate(rule: ThresholdRule, key) -> ThresholdRule:
    if rule.kind != "ADAuto":
        return rule
    seed = int(np.random.SeedSequence(list(key) + [rule.seed]).generate_state(1)[0])
    return ThresholdRule(rule.kind, rule.p, rule.window, rule.candidates, rule.alpha_level, rule.n_boot, seed)


def run_cell(grid: ExperimentGrid, cell: int, alpha: float, gamma: float, n: int) -> dict[str, list[Replicate]]:
    """All replicates of one cell for every method, keyed by method label."""
    p = TextureParams(alpha, gamma)
    out: dict[str, list[Replicate]] = {m.label: [] for m in grid.methods}
    for rep in range(grid.replicates):
        s = draw_replicate(grid, cell, rep, p, n)
        try:
            th = select_threshold(s, _rule_for_replicate(grid.threshold_rule, replicate_key(grid.master_seed, cell, rep)))
        except Gi0Error:
            th = None
        for cfg in grid.methods:
            if th is None:
                out[cfg.label].append(Replicate(math.nan, math.nan, Status.INSUFFICIENT, 0.0, math.nan))
                continue
            r = fit(th.excesses, cfg)
            out[cfg.label].append(
                Replicate(r.alpha, r.gamma - th.u, r.status, r.wall_time * 1e3, th.u)
            )
    return out


def summarize(method: str, alpha: float, gamma: float, n: int, reps: list[Replicate]) -> MetricsRow:
    """Convergence rate over all replicates; bias and MSE over converged ones."""
    conv = [r for r in reps if r.status is Status.CONVERGED]
    rate = len(conv) / len(reps) if reps else 0.0
    times = [r.time_ms for r in reps]
    med = float(np.median(times)) if times else math.nan
    if not conv:
        return MetricsRow(method, alpha, gamma, n, rate, math.nan, math.nan, math.nan, math.nan, med, 0)
    a = np.array([r.alpha_hat for r in conv])
    g = np.array([r.gamma_hat for r in conv])
    return MetricsRow(
        method,
        alpha,
        gamma,
        n,
        rate,
        float(np.mean(a) - alpha),
        float(np.mean((a - alpha) ** 2)),
        float(np.mean(g) - gamma),
        float(np.mean((g - gamma) ** 2)),
        med,
        len(conv),
    )


def _cell_task(args):
    grid, cell, a, g, n = args
    reps = run_cell(grid, cell, a, g, n)
    return [summarize(m, a, g, n, reps[m]) for m in reps]


def run_grid(grid: ExperimentGrid, workers: int = 1) -> list[MetricsRow]:
    """Summaries for every (method, alpha, gamma, n) cell, ordered by cell then method."""
    tasks = [(grid, c, a, g, n) for c, a, g, n in grid.cells()]
    if workers <= 1:
        chunks = [_cell_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            chunks = list(ex.map(_cell_task, tasks))
    return [row for chunk in chunks for row in chunk]


# --------------------------------------------------------------------- SEIF


def seif_curve(method: EstimatorConfig | str, n: int, p: TextureParams, c_grid) -> SeifCurve:
    """Texture estimate as the largest stylized observation is replaced by each c."""
    cfg = EstimatorConfig.parse(method) if isinstance(method, str) else method
    if n < 5:
        raise Gi0Error("SEIF needs n >= 5")
    cs = [float(c) for c in c_grid]
    if any(not c > 0 for c in cs):
        raise Gi0Error("contaminant values must be positive")
    base = stylized_sample(n, p).values
    est, st = [], []
    for c in cs:
        z = base.copy()
        z[-1] = c
        r = fit(z, cfg)
        ok = r.params is not None and r.status is not Status.DIVERGED
        est.append(r.alpha if ok else math.nan)
        st.append(str(r.status))
    return SeifCurve(cfg.label, n, p, cs, est, st)


def default_seif_grid(points: int = 40) -> list[float]:
    return list(np.linspace(25.0, 1000.0, points))


# ------------------------------------------------------------------- timing


@dataclass
class TimingSummary:
    method: str
    median_ms: float
    q1_ms: float
    q3_ms: float
    times_ms: list[float]


def timing_benchmark(methods, n: int, p: TextureParams, replicates: int = 100, seed: int = 0) -> dict[str, TimingSummary]:
    """Per-method fit times on identical samples; methods alternate within each sample."""
    if replicates < 30:
        raise Gi0Error("timing needs at least 30 replicates")
    cfgs = [EstimatorConfig.parse(m) if isinstance(m, str) else m for m in methods]
    times = {c.label: [] for c in cfgs}
    for rep in range(replicates):
        z = sample(n, p, (seed, rep)).values
        for c in cfgs:
            times[c.label].append(fit(z, c).wall_time * 1e3)
    out = {}
    for label, t in times.items():
        q1, med, q3 = np.percentile(t, [25, 50, 75])
        out[label] = TimingSummary(label, float(med), float(q1), float(q3), t)
    return out


# ------------------------------------------------------------------ presets


def threshold_comparison_preset(replicates: int = 200, methods=("MDPD", "MLE"), master_seed: int = 0) -> list[ExperimentGrid]:
    """One grid per threshold rule over n in {25, 49, 81}, alpha in {-8,-5,-2}, gamma in {0.1,1,10}."""
    return [
        ExperimentGrid(
            alphas=list(GRID_ALPHAS),
            gammas=[0.1, 1.0, 10.0],
            sizes=[25, 49, 81],
            replicates=replicates,
            master_seed=master_seed,
            methods=[EstimatorConfig.parse(m) for m in methods],
            threshold_rule=rule,
        )
        for rule in STANDARD_RULES
    ]


def paper_reproduction_preset(replicates: int = 300, full: bool = False, master_seed: int = 0) -> ExperimentGrid:
    """Uncontaminated sweep over the full parameter grid with the six compared methods."""
    return ExperimentGrid(
        alphas=list(GRID_ALPHAS),
        gammas=list(GRID_GAMMAS),
        sizes=list(GRID_SIZES),
        replicates=1000 if full else replicates,
        master_seed=master_seed,
        methods=[EstimatorConfig.parse(m) for m in DEFAULT_METHODS],
    )


@dataclass
class RuleRank:
    method: str
    rule: str
    mean_mse_alpha: float
    mean_convergence: float
    rank: int


def rank_thresholds(results: dict[str, list[MetricsRow]], n: int = 49) -> list[RuleRank]:
    """Rank rules per method by mean alpha-MSE over the (alpha, gamma) cells at size ``n``.

    Cells without converged replicates count as infinite MSE.
    """
    table = []
    methods = sorted({r.method for rows in results.values() for r in rows})
    for m in methods:
        scores = []
        for rule, rows in results.items():
            sel = [r for r in rows if r.method == m and r.n == n]
            if not sel:
                continue
            mse = [r.mse_alpha if not r.flagged else math.inf for r in sel]
            scores.append((float(np.mean(mse)), float(np.mean([r.convergence_rate for r in sel])), rule))
        scores.sort(key=lambda s: (s[0], -s[1]))
        table += [RuleRank(m, rule, mse, conv, k + 1) for k, (mse, conv, rule) in enumerate(scores)]
    return table
