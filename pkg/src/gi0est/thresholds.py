"""Peaks-over-threshold helpers and threshold-selection rules.

Rules, by label:

* ``u0``     whole sample (u = 0)
* ``u_q10``  empirical 10% quantile, keeps the 90% largest values
* ``u_q20``  empirical 20% quantile, keeps the 80% largest values
* ``u_Hill`` most stable stretch of the Hill plot
* ``u_AD``   smallest candidate whose bootstrap AD p-value is acceptable

Empirical quantiles always use linear interpolation between order
statistics (Hyndman-Fan type 7).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .gof import BootstrapInvalid, ad_pvalue
from .model import Gi0Error, Sample, as_array

RULE_KINDS = ("U0", "Quantile", "Hill", "ADAuto")


class NoExcesses(Gi0Error):
    pass


class WindowTooWide(Gi0Error):
    pass


@dataclass(frozen=True)
class ThresholdRule:
    kind: str = "U0"
    p: float = 0.10  # Quantile level
    window: int | None = None  # Hill; None means max(5, n // 20)
    candidates: int = 5  # ADAuto
    alpha_level: float = 0.05
    n_boot: int = 99
    seed: int = 0

    def __post_init__(self):
        if self.kind not in RULE_KINDS:
            raise Gi0Error(f"unknown threshold rule {self.kind!r}; choose from {', '.join(RULE_KINDS)}")
        if self.kind == "Quantile" and not 0 < self.p < 1:
            raise Gi0Error("quantile level must lie in (0, 1)")
        if self.kind == "Hill" and self.window is not None and self.window < 2:
            raise Gi0Error("Hill window must be at least 2")
        if self.kind == "ADAuto":
            if self.candidates < 3:
                raise Gi0Error("ADAuto needs at least 3 candidates")
            if not 0 < self.alpha_level <= 0.5:
                raise Gi0Error("alpha_level must lie in (0, 0.5]")
            if self.n_boot < 99:
                raise Gi0Error("n_boot must be at least 99")

    @property
    def label(self) -> str:
        if self.kind == "U0":
            return "u0"
        if self.kind == "Quantile":
            return f"u_q{round(self.p * 100):d}"
        return "u_Hill" if self.kind == "Hill" else "u_AD"

    @classmethod
    def from_label(cls, label: str, **kw) -> "ThresholdRule":
        key = label.strip()
        if key in ("u0", "U0"):
            return cls("U0", **kw)
        if key.startswith("u_q"):
            return cls("Quantile", p=int(key[3:]) / 100.0, **kw)
        if key in ("u_Hill", "Hill"):
            return cls("Hill", **kw)
        if key in ("u_AD", "ADAuto"):
            return cls("ADAuto", **kw)
        raise Gi0Error(f"unknown threshold label {label!r}")


STANDARD_RULES = (
    ThresholdRule("U0"),
    ThresholdRule("Quantile", p=0.10),
    ThresholdRule("Quantile", p=0.20),
    ThresholdRule("Hill"),
    ThresholdRule("ADAuto"),
)


@dataclass
class ThresholdResult:
    u: float
    excesses: Sample
    retained_fraction: float
    flag: str = ""
    hill: float | None = None
    pvalues: list[float] = field(default_factory=list)


def excesses(sample, u: float) -> ThresholdResult:
    """Excesses z - u of the observations strictly above ``u``, ascending.

    ``u = 0`` keeps the whole sample, zeros included.
    """
    if not u >= 0:
        raise Gi0Error(f"threshold must be nonnegative, got {u}")
    z = np.sort(as_array(sample))
    n = z.size
    if u == 0:
        exc = z.copy()
    else:
        exc = z[z > u] - u
    if exc.size == 0:
        raise NoExcesses(f"no observation exceeds u={u}")
    return ThresholdResult(float(u), Sample(exc), exc.size / n)


def empirical_quantile(sample, level: float) -> float:
    return float(np.quantile(as_array(sample), level, method="linear"))


def select_threshold(sample, rule: ThresholdRule) -> ThresholdResult:
    z = as_array(sample)
    if rule.kind == "U0":
        return excesses(z, 0.0)
    if rule.kind == "Quantile":
        if z.size < 10:
            raise Gi0Error("quantile thresholds need at least 10 observations")
        return excesses(z, empirical_quantile(z, rule.p))
    if rule.kind == "Hill":
        return hill_threshold(z, rule.window)
    return ad_auto_threshold(z, rule.candidates, rule.alpha_level, rule.n_boot, rule.seed)


def hill_estimates(sample) -> tuple[np.ndarray, np.ndarray]:
    """Hill estimates H_k for k = 2..floor(n/2); returns (k, H)."""
    z = np.sort(as_array(sample))
    n = z.size
    if np.any(z <= 0):
        raise Gi0Error("the Hill estimator needs strictly positive data")
    logs = np.log(z[::-1])  # descending: logs[j-1] = ln z_(n-j+1)
    ks = np.arange(2, n // 2 + 1)
    csum = np.cumsum(logs)
    H = csum[ks - 1] / ks - logs[ks]
    return ks, H


def hill_threshold(sample, window: int | None = None) -> ThresholdResult:
    """Threshold at the centre of the least variable window of the Hill plot."""
    z = np.sort(as_array(sample))
    n = z.size
    if n < 20:
        raise Gi0Error("Hill threshold selection needs at least 20 observations")
    ks, H = hill_estimates(z)
    w = max(5, n // 20) if window is None else int(window)
    if w > ks.size:
        raise WindowTooWide(f"window {w} exceeds the {ks.size} available Hill estimates")
    roll = np.lib.stride_tricks.sliding_window_view(H, w).std(axis=1, ddof=1)
    start = int(np.argmin(roll))
    j = start + w // 2
    k_star = int(ks[j])
    res = excesses(z, float(z[n - k_star - 1]))
    res.hill = float(H[j])
    return res


def ad_auto_threshold(sample, candidates: int = 5, alpha_level: float = 0.05, n_boot: int = 99, seed: int = 0) -> ThresholdResult:
    """Smallest candidate threshold whose excesses pass the bootstrap AD test.

    Candidates sit at quantile levels 0, 1/candidates, ..., (candidates-1)/candidates,
    the first being u = 0.  When every candidate is rejected the highest one
    is returned with ``flag = "AllRejected"``.
    """
    from .estimators import fit_mle

    if candidates < 3:
        raise Gi0Error("ADAuto needs at least 3 candidates")
    z = np.sort(as_array(sample))
    levels = np.arange(candidates) / candidates
    pvalues = []
    last = None
    for j, level in enumerate(levels):
        u = 0.0 if level == 0 else empirical_quantile(z, level)
        try:
            res = excesses(z, u)
        except NoExcesses:
            pvalues.append(0.0)
            continue
        last = res
        pv = 0.0
        if len(res.excesses) >= 2:
            f = fit_mle(res.excesses)
            if f.params is not None and f.status.value != "Diverged":
                try:
                    pv = ad_pvalue(res.excesses, f.params, n_boot=n_boot, seed=seed * 1000 + j)
                except BootstrapInvalid:
                    pv = 0.0
        pvalues.append(pv)
        if pv >= alpha_level:
            res.pvalues = pvalues
            return res
    if last is None:
        raise NoExcesses("no candidate threshold leaves any excess")
    last.flag = "AllRejected"
    last.pvalues = pvalues
    return last
