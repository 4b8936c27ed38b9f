"""EDF goodness-of-fit statistics on probability-integral-transformed samples.

All statistics take the ascending vector ``u_i = F(z_(i))``.  The tail
weighted Anderson-Darling variants follow Luceno's forms.  Writing
``a_i = 2i - 1`` and ``b_i = 2n - 2i + 1`` (so that the ``u_{n+1-i}`` sums are
re-indexed), with ``S = 1 - u``:

    KS   = max_i max(i/n - u_i, u_i - (i-1)/n)
    CM   = 1/(12n) + sum (u_i - a_i/(2n))^2
    AD   = -n - (1/n) sum [a_i ln u_i + b_i ln S_i]
    ADR  = n/2 - 2 sum u_i - (1/n) sum b_i ln S_i
    ADL  = -3n/2 + 2 sum u_i - (1/n) sum a_i ln u_i
    AD2R = 2 sum ln S_i + (1/n) sum b_i / S_i
    AD2L = 2 sum ln u_i + (1/n) sum a_i / u_i
    AD2  = AD2R + AD2L
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import Gi0Error, TextureParams, as_array, cdf, rng_for, sf as model_sf

STATS = ("KS", "CM", "AD", "ADR", "ADL", "AD2R", "AD2L", "AD2")
_NEEDS_LOW = {"AD", "ADL", "AD2L", "AD2"}
_NEEDS_HIGH = {"AD", "ADR", "AD2R", "AD2"}


class BootstrapInvalid(Gi0Error):
    """Too many bootstrap refits failed for the p-value to be meaningful."""


@dataclass(frozen=True)
class UniformizedSample:
    """Model CDF values at the ascending order statistics.

    ``s`` holds the matching survival values ``1 - u`` computed directly from
    the model so that the right-tail statistics keep full precision.
    """

    u: np.ndarray
    s: np.ndarray

    @property
    def n(self) -> int:
        return self.u.size

    @property
    def open_interval(self) -> bool:
        return bool(np.all(self.u > 0) and np.all(self.s > 0))


def check_stat(stat: str) -> str:
    if stat not in STATS:
        raise Gi0Error(f"unknown goodness-of-fit statistic {stat!r}; choose from {', '.join(STATS)}")
    return stat


def uniformize(sample, p: TextureParams) -> UniformizedSample:
    z = np.sort(as_array(sample))
    if z.size == 0:
        raise Gi0Error("cannot uniformize an empty sample")
    return UniformizedSample(np.asarray(cdf(z, p), dtype=float), np.asarray(model_sf(z, p), dtype=float))


def _coerce(u, s=None):
    if isinstance(u, UniformizedSample):
        return u.u, u.s
    u = np.asarray(u, dtype=float)
    return u, (1.0 - u) if s is None else np.asarray(s, dtype=float)


def _weights(n):
    i = np.arange(1, n + 1, dtype=float)
    return i, 2.0 * i - 1.0, 2.0 * n - 2.0 * i + 1.0


def gof_stat(stat: str, u, s=None) -> float:
    """Value of ``stat`` for ascending ``u`` (a ``UniformizedSample`` or array).

    Returns ``inf`` when a log or reciprocal term meets u = 0 or u = 1.
    """
    check_stat(stat)
    u, s = _coerce(u, s)
    n = u.size
    if n == 0:
        raise Gi0Error("empty uniformized sample")
    i, a, b = _weights(n)
    if stat == "KS":
        return float(max(np.max(i / n - u), np.max(u - (i - 1) / n)))
    if stat == "CM":
        return float(1.0 / (12 * n) + np.sum((u - a / (2 * n)) ** 2))
    if stat in _NEEDS_LOW and np.any(u <= 0):
        return math.inf
    if stat in _NEEDS_HIGH and np.any(s <= 0):
        return math.inf
    if stat == "AD":
        return float(-n - np.sum(a * np.log(u) + b * np.log(s)) / n)
    if stat == "ADR":
        return float(n / 2.0 - 2.0 * np.sum(u) - np.sum(b * np.log(s)) / n)
    if stat == "ADL":
        return float(-1.5 * n + 2.0 * np.sum(u) - np.sum(a * np.log(u)) / n)
    ad2r = ad2l = 0.0
    if stat in ("AD2R", "AD2"):
        ad2r = 2.0 * np.sum(np.log(s)) + np.sum(b / s) / n
    if stat in ("AD2L", "AD2"):
        ad2l = 2.0 * np.sum(np.log(u)) + np.sum(a / u) / n
    return float(ad2r + ad2l)


def gof_grad(stat: str, u, s=None) -> np.ndarray:
    """Derivative of ``gof_stat`` with respect to each u_i (KS: a subgradient)."""
    check_stat(stat)
    u, s = _coerce(u, s)
    n = u.size
    i, a, b = _weights(n)
    g = np.zeros(n)
    if stat == "KS":
        dplus, dminus = i / n - u, u - (i - 1) / n
        k1, k2 = int(np.argmax(dplus)), int(np.argmax(dminus))
        if dplus[k1] >= dminus[k2]:
            g[k1] = -1.0
        else:
            g[k2] = 1.0
        return g
    if stat == "CM":
        return 2.0 * (u - a / (2 * n))
    if stat in ("AD", "ADL"):
        g -= a / (n * u)
    if stat in ("AD", "ADR"):
        g += b / (n * s)
    if stat == "ADR":
        g -= 2.0
    if stat == "ADL":
        g += 2.0
    if stat in ("AD2R", "AD2"):
        g += -2.0 / s + b / (n * s * s)
    if stat in ("AD2L", "AD2"):
        g += 2.0 / u - a / (n * u * u)
    return g


def ad_statistic(sample, p: TextureParams) -> float:
    return gof_stat("AD", uniformize(sample, p))


def ad_pvalue(sample, p: TextureParams, n_boot: int = 200, seed: int = 0) -> float:
    """Parametric-bootstrap p-value of the AD statistic with MLE refits.

    The observed statistic is computed at ``p`` (normally the MLE of
    ``sample``).  Each replicate draws a sample of the same size from ``p``,
    refits by maximum likelihood and computes its own AD statistic.
    Replicates whose refit diverges are dropped; if half or more are
    dropped the p-value is declared invalid.
    """
    from .estimators import mle_batch  # deferred: estimators imports this module

    if n_boot < 99:
        raise Gi0Error(f"n_boot must be at least 99, got {n_boot}")
    z = as_array(sample)
    n = z.size
    if n < 2:
        raise Gi0Error("ad_pvalue needs at least two observations")
    observed = ad_statistic(z, p)

    uni = rng_for(seed, 0xAD).random((n_boot, n))
    boot = p.gamma * np.expm1(np.log1p(-uni) / p.alpha)
    boot.sort(axis=1)
    alpha, gamma, ok = mle_batch(boot)
    dropped = int(np.sum(~ok))
    if 2 * dropped >= n_boot:
        raise BootstrapInvalid(f"{dropped} of {n_boot} bootstrap refits diverged")
    stats = _ad_batch(boot[ok], alpha[ok], gamma[ok])
    return float(np.mean(stats >= observed))


def _ad_batch(zs: np.ndarray, alpha: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    """AD statistic row by row for sorted samples and per-row parameters."""
    n = zs.shape[1]
    _, a, b = _weights(n)
    log_s = alpha[:, None] * np.log1p(zs / gamma[:, None])
    with np.errstate(divide="ignore"):
        log_u = np.log(-np.expm1(log_s))
    return -n - (log_u @ a + log_s @ b) / n
