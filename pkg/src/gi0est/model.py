"""Single-look G0 intensity model.

For one look the G0 law coincides with a Generalized Pareto Type II law with
location 0, scale ``gamma`` and power ``-alpha``:

    f(z) = (-alpha / gamma) * (1 + z / gamma) ** (alpha - 1),   z >= 0
    F(z) = 1 - (1 + z / gamma) ** alpha

Everything here is a pure function of its inputs.  Random draws use a
counter-based generator (Philox) keyed by a ``SeedSequence``, so a stream is
fully determined by its integer key.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import gammaln

INFINITE = math.inf


class Gi0Error(ValueError):
    """Base class for validation errors raised by this package."""


class InsufficientSample(Gi0Error):
    pass


@dataclass(frozen=True)
class TextureParams:
    """Texture ``alpha < 0`` and scale ``gamma > 0`` of a single-look G0 law."""

    alpha: float
    gamma: float
    looks: int = 1

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha < 0):
            raise Gi0Error(f"alpha must be a finite negative number, got {self.alpha}")
        if not (math.isfinite(self.gamma) and self.gamma > 0):
            raise Gi0Error(f"gamma must be a finite positive number, got {self.gamma}")
        if self.looks != 1:
            raise Gi0Error("only single-look data (looks=1) is supported")

    @property
    def beta(self) -> float:
        """GP-II power parameter."""
        return -self.alpha

    @property
    def shape(self) -> float:
        """GPD shape xi = -1/alpha."""
        return -1.0 / self.alpha

    @property
    def scale(self) -> float:
        """GPD scale sigma = -gamma/alpha."""
        return -self.gamma / self.alpha

    @property
    def location(self) -> float:
        return 0.0

    @property
    def tail_index(self) -> float:
        return 1.0 - self.alpha


@dataclass(frozen=True)
class ContaminationSpec:
    """Each observation is replaced by ``c_value`` with probability ``epsilon``."""

    epsilon: float
    c_value: float

    def __post_init__(self):
        if not (0.0 < self.epsilon < 1.0):
            raise Gi0Error(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if not (math.isfinite(self.c_value) and self.c_value > 0):
            raise Gi0Error(f"c_value must be positive, got {self.c_value}")


@dataclass
class Sample:
    """Nonnegative intensity observations plus provenance."""

    values: np.ndarray
    seed: int | None = None
    contamination: ContaminationSpec | None = None
    contaminated: np.ndarray | None = None  # boolean mask of replaced positions
    _sorted: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        if not np.all(np.isfinite(v)):
            raise Gi0Error("sample values must be finite")
        if np.any(v < 0):
            raise Gi0Error("sample values must be nonnegative")
        self.values = v

    def __len__(self):
        return self.values.size

    @property
    def sorted(self) -> np.ndarray:
        if self._sorted is None:
            self._sorted = np.sort(self.values)
        return self._sorted


def as_array(sample) -> np.ndarray:
    """Values of a ``Sample`` or any array-like, as a 1-D float array."""
    if isinstance(sample, Sample):
        return sample.values
    return np.asarray(sample, dtype=float).ravel()


def rng_for(*key) -> np.random.Generator:
    """Independent counter-based stream for a key of nonnegative integers.

    A single tuple argument is unpacked, so ``rng_for(7)``, ``rng_for(7, 0, 3)``
    and ``rng_for((7, 0, 3))`` are all valid.
    """
    if len(key) == 1 and isinstance(key[0], (tuple, list)):
        key = tuple(key[0])
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(k) for k in key])))


def _check_z(z):
    z = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z)):
        raise Gi0Error("z must be finite")
    if np.any(z < 0):
        raise Gi0Error("z must be nonnegative")
    return z


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def density(z, p: TextureParams):
    z = _check_z(z)
    a, g = p.alpha, p.gamma
    return _out(np.exp(math.log(-a / g) + (a - 1.0) * np.log1p(z / g)))


def density_multilook(z, alpha: float, gamma: float, looks: int):
    """General G0 intensity density for ``looks`` >= 1."""
    if int(looks) != looks or looks < 1:
        raise Gi0Error(f"looks must be an integer >= 1, got {looks}")
    if not alpha < 0 or not gamma > 0:
        raise Gi0Error("need alpha < 0 and gamma > 0")
    z = _check_z(z)
    L = float(looks)
    log_c = L * math.log(L) + gammaln(L - alpha) - alpha * math.log(gamma) - gammaln(-alpha) - gammaln(L)
    with np.errstate(divide="ignore"):
        log_z = np.where(z > 0, np.log(np.where(z > 0, z, 1.0)), -np.inf)
    body = (L - 1.0) * log_z if looks > 1 else np.zeros_like(z)
    out = np.exp(log_c + body - (L - alpha) * np.log(gamma + z * L))
    return _out(out)


def cdf(z, p: TextureParams):
    z = _check_z(z)
    return _out(-np.expm1(p.alpha * np.log1p(z / p.gamma)))


def sf(z, p: TextureParams):
    """Survival function 1 - F(z), computed without cancellation."""
    z = _check_z(z)
    return _out(np.exp(p.alpha * np.log1p(z / p.gamma)))


def quantile(u, p: TextureParams):
    u = np.asarray(u, dtype=float)
    if np.any(~np.isfinite(u)) or np.any(u < 0) or np.any(u >= 1):
        raise Gi0Error("quantile level must lie in [0, 1)")
    return _out(p.gamma * np.expm1(np.log1p(-u) / p.alpha))


def moment(r: float, p: TextureParams) -> float:
    """E[Z**r]; ``INFINITE`` when alpha >= -r."""
    if not r > 0:
        raise Gi0Error(f"moment order must be positive, got {r}")
    if p.alpha >= -r:
        return INFINITE
    return math.exp(r * math.log(p.gamma) + math.lgamma(-p.alpha - r) + math.lgamma(1.0 + r) - math.lgamma(-p.alpha))


def pwm_population(s: int, p: TextureParams) -> float:
    """E[Z (1 - F(Z))**s]; ``INFINITE`` unless alpha * (s + 1) < -1."""
    if int(s) != s or s < 0:
        raise Gi0Error(f"s must be a nonnegative integer, got {s}")
    k = s + 1.0
    if not p.alpha * k < -1.0:
        return INFINITE
    return p.gamma / (k * (-1.0 - p.alpha * k))


def log_gamma(t: float) -> float:
    if not (math.isfinite(t) and t > 0):
        raise Gi0Error(f"log_gamma needs t > 0, got {t}")
    return math.lgamma(t)


def _check_n(n):
    if int(n) != n or n < 1:
        raise Gi0Error(f"sample size must be a positive integer, got {n}")
    return int(n)


def sample(n: int, p: TextureParams, seed) -> Sample:
    """Draw ``n`` variates by inversion from the stream keyed by ``seed``."""
    n = _check_n(n)
    u = rng_for(seed).random(n)
    return Sample(quantile(u, p), seed=seed if isinstance(seed, int) else None)


def sample_contaminated(n: int, p: TextureParams, spec: ContaminationSpec, seed) -> Sample:
    """Draw Z = B*C + (1 - B)*W with B ~ Bernoulli(epsilon), W ~ G0(p).

    The background W uses the same uniforms as ``sample(n, p, seed)``; the
    Bernoulli draws come afterwards from the same stream.
    """
    n = _check_n(n)
    if not isinstance(spec, ContaminationSpec):
        raise Gi0Error("spec must be a ContaminationSpec")
    gen = rng_for(seed)
    w = quantile(gen.random(n), p)
    b = gen.random(n) < spec.epsilon
    z = np.where(b, spec.c_value, w)
    return Sample(z, seed=seed if isinstance(seed, int) else None, contamination=spec, contaminated=b)


def stylized_sample(n: int, p: TextureParams) -> Sample:
    """Deterministic quantile sample quantile(i/(n+1)), i = 1..n."""
    n = _check_n(n)
    u = np.arange(1, n + 1) / (n + 1.0)
    return Sample(quantile(u, p))


def excess_params(p: TextureParams, u: float) -> TextureParams:
    """Law of Z - u given Z > u: same texture, scale shifted to gamma + u."""
    return TextureParams(p.alpha, p.gamma + u)


def gpd_density(z, mu: float, sigma: float, beta: float):
    """GP-II density (beta/sigma)(1 + (z - mu)/sigma)**(-beta - 1) for z >= mu."""
    z = np.asarray(z, dtype=float)
    return _out(beta / sigma * (1.0 + (z - mu) / sigma) ** (-beta - 1.0))


def empirical_cdf_distance(values: Sequence[float], p: TextureParams) -> float:
    """Sup-distance between the empirical CDF of ``values`` and the model CDF."""
    x = np.sort(np.asarray(values, dtype=float))
    n = x.size
    F = cdf(x, p)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))
