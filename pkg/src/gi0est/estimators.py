"""Parameter estimators for the single-look G0 law.

Every iterative method works on data divided by its sample mean, so that
fitting ``c * z`` returns exactly ``c`` times the scale; boxes are rescaled
accordingly.  Results always lie inside the configured boxes; numerical
trouble is reported through ``FitResult.status`` and never raised.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from scipy.optimize import brentq, minimize

from . import gof
from .model import Gi0Error, InsufficientSample, TextureParams, as_array

METHODS = ("MLE", "MPLE", "MOM", "PWM", "LME", "MDPD", "MGF")

# points per decade of the profile / root-scan grids over the scale box
_GRID_PER_DECADE = 8


class Status(str, Enum):
    CONVERGED = "Converged"
    DIVERGED = "Diverged"
    BOUNDARY = "BoundaryHit"
    INSUFFICIENT = "InsufficientSample"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class EstimatorConfig:
    method: str = "MLE"
    alpha_box: tuple[float, float] = (-20.0, -0.1)
    gamma_box: tuple[float, float] = (1e-6, 1e6)
    tol: float = 1e-8
    max_iter: int = 500
    mdpd_omega: float = 0.1
    mple_lambda: float = 1.0
    lme_r: float = -0.5
    mgf_stat: str = "ADR"

    def __post_init__(self):
        if self.method not in METHODS:
            raise Gi0Error(f"unknown method {self.method!r}; choose from {', '.join(METHODS)}")
        lo, hi = self.alpha_box
        if not (lo < hi < 0):
            raise Gi0Error(f"alpha_box must satisfy lo < hi < 0, got {self.alpha_box}")
        glo, ghi = self.gamma_box
        if not (0 < glo < ghi < math.inf):
            raise Gi0Error(f"gamma_box must satisfy 0 < lo < hi, got {self.gamma_box}")
        if not self.mdpd_omega > 0:
            raise Gi0Error("mdpd_omega must be positive")
        if not self.mple_lambda > 0:
            raise Gi0Error("mple_lambda must be positive")
        if not -1 < self.lme_r < 0:
            raise Gi0Error("lme_r must lie in (-1, 0)")
        if not (self.tol > 0 and self.max_iter >= 1):
            raise Gi0Error("tol must be positive and max_iter at least 1")
        gof.check_stat(self.mgf_stat)

    @property
    def label(self) -> str:
        return f"MGF({self.mgf_stat})" if self.method == "MGF" else self.method

    @classmethod
    def parse(cls, text: str, **overrides) -> "EstimatorConfig":
        """Build a config from labels like ``MLE``, ``MGF(ADR)``, ``MGF:KS`` or ``ADR``."""
        t = text.strip().upper()
        if t.startswith("MGF"):
            stat = t[3:].strip("():").strip() or overrides.pop("mgf_stat", "ADR")
            return cls(method="MGF", mgf_stat=stat, **overrides)
        if t in gof.STATS:
            return cls(method="MGF", mgf_stat=t, **overrides)
        return cls(method=t, **overrides)


@dataclass(frozen=True)
class FitResult:
    params: TextureParams | None
    status: Status
    objective: float
    iterations: int
    wall_time: float  # seconds
    method: str = ""
    residual: float = math.nan

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED

    @property
    def alpha(self) -> float:
        return self.params.alpha if self.params is not None else math.nan

    @property
    def gamma(self) -> float:
        return self.params.gamma if self.params is not None else math.nan


# ---------------------------------------------------------------- likelihood


def loglik(sample, p: TextureParams) -> float:
    """Log-likelihood n ln(-a) - n ln g + (a - 1) sum ln(1 + z/g)."""
    z = as_array(sample)
    if z.size == 0:
        raise InsufficientSample("log-likelihood of an empty sample")
    n = z.size
    a, g = p.alpha, p.gamma
    return float(n * math.log(-a) - n * math.log(g) + (a - 1.0) * np.sum(np.log1p(z / g)))


def loglik_grad(sample, p: TextureParams) -> tuple[float, float]:
    """Score (d/d alpha, d/d gamma) of ``loglik``."""
    z = as_array(sample)
    if z.size == 0:
        raise InsufficientSample("score of an empty sample")
    n = z.size
    a, g = p.alpha, p.gamma
    d_alpha = n / a + np.sum(np.log1p(z / g))
    d_gamma = -n / g + (1.0 - a) * np.sum(z / (g * (g + z)))
    return float(d_alpha), float(d_gamma)


def mple_penalty(alpha, lam: float = 1.0):
    """Additive log-penalty lam * eta/(eta - 1) with eta = -1/alpha, i.e. lam/(1 + alpha).

    Equals ``-inf`` once alpha >= -1 (eta >= 1).
    """
    alpha = np.asarray(alpha, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.where(alpha < -1.0, lam / np.minimum(1.0 + alpha, -1e-300), -np.inf)
    return float(out) if out.ndim == 0 else out


def mdpd_integral(p: TextureParams, omega: float) -> float:
    """Closed form of the integral of f**(1 + omega) over [0, inf)."""
    a = p.alpha
    d = (1.0 - a) * (1.0 + omega) - 1.0
    return math.exp((1.0 + omega) * math.log(-a) - omega * math.log(p.gamma) - math.log(d))


def mdpd_objective(sample, p: TextureParams, omega: float) -> float:
    """Density power divergence criterion (constant terms included)."""
    z = as_array(sample)
    a, g = p.alpha, p.gamma
    logf = math.log(-a / g) + (a - 1.0) * np.log1p(z / g)
    c = 1.0 + 1.0 / omega
    return float(mdpd_integral(p, omega) - c - c * np.mean(np.expm1(omega * logf)))


def mgf_objective(sample, p: TextureParams, stat: str) -> float:
    return gof.gof_stat(stat, gof.uniformize(sample, p))


# ------------------------------------------------------ profile likelihood core


def _standardize(z: np.ndarray):
    s = float(np.mean(z))
    return z / s, s


def _inner_alpha(S, n, lo, hi, lam):
    """Maximizer in alpha of the (penalized) likelihood at fixed scale.

    The objective is concave in alpha, so clipping the stationary point to
    the box gives the constrained maximizer.
    """
    a_mle = -n / S
    if lam is None:
        return np.clip(a_mle, lo, hi)
    # n/a + S - lam/(1+a)^2 = 0 on a < -1: concave and decreasing, so Newton
    # started where g < 0 moves monotonically left onto the root.
    hi = min(hi, -1.0 - 1e-12)
    a = np.minimum(a_mle, -1.0 - 1e-3)
    for _ in range(40):
        g = n / a + S - lam / (1.0 + a) ** 2
        bad = g >= 0
        if not np.any(bad):
            break
        a = np.where(bad, -1.0 - (-1.0 - a) / 10.0, a)
    for _ in range(60):
        g = n / a + S - lam / (1.0 + a) ** 2
        dg = -n / a**2 + 2.0 * lam / (1.0 + a) ** 3
        step = g / dg
        a_new = np.maximum(a - step, lo - 1.0)
        if np.all(np.abs(a_new - a) <= 1e-15 * np.abs(a)):
            a = a_new
            break
        a = a_new
    return np.clip(a, lo, hi)


def _profile_value(S, n, a, lg, lam):
    val = n * np.log(-a) - n * lg + (a - 1.0) * S
    if lam is not None:
        val = val + lam / (1.0 + a)
    return val


def _profile_rows(Z, lo, hi, lg_lo, lg_hi, lam):
    """Box-constrained (penalized) MLE for each row of standardized data ``Z``.

    Returns alpha, log-gamma, a flag for a pinned alpha, a flag for a pinned
    gamma, the log-gamma score residual and the iteration count.
    """
    B, n = Z.shape
    decades = (lg_hi - lg_lo) / math.log(10.0)
    G = int(max(25, math.ceil(_GRID_PER_DECADE * np.max(decades)) + 1))
    t = np.linspace(0.0, 1.0, G)
    LG = lg_lo[:, None] + t[None, :] * (lg_hi - lg_lo)[:, None]  # (B, G)

    S = np.empty((B, G))
    chunk = max(1, int(2_000_000 // max(1, G * n)))
    for r0 in range(0, B, chunk):
        zc = Z[r0 : r0 + chunk]
        S[r0 : r0 + chunk] = np.log1p(zc[:, None, :] / np.exp(LG[r0 : r0 + chunk])[:, :, None]).sum(axis=2)
    A = _inner_alpha(S, n, lo, hi, lam)
    P = _profile_value(S, n, A, LG, lam)
    k = np.argmax(P, axis=1)
    rows = np.arange(B)

    def score(lg):
        # envelope derivative of the profile with respect to log-gamma
        g = np.exp(lg)
        Sg = np.log1p(Z / g[:, None]).sum(axis=1)
        a = _inner_alpha(Sg, n, lo, hi, lam)
        return -n + (1.0 - a) * np.sum(Z / (g[:, None] + Z), axis=1)

    lg_k = LG[rows, k]
    s_k = score(lg_k)
    step = (lg_hi - lg_lo) / (G - 1)
    go_right = s_k > 0
    pin_low = (k == 0) & (s_k <= 0)
    pin_high = (k == G - 1) & (s_k >= 0)
    pinned = pin_low | pin_high

    a_end = np.where(go_right, lg_k, lg_k - step)
    b_end = np.where(go_right, lg_k + step, lg_k)
    a_end = np.clip(a_end, lg_lo, lg_hi)
    b_end = np.clip(b_end, lg_lo, lg_hi)
    fa = np.where(go_right, s_k, score(a_end))
    fb = np.where(go_right, score(b_end), s_k)
    ok = (~pinned) & (fa > 0) & (fb < 0)

    # Illinois iteration on the score, vectorized over rows
    lg = lg_k.copy()
    iters = 0
    active = ok.copy()
    x_lo, x_hi, f_lo, f_hi = a_end.copy(), b_end.copy(), fa.copy(), fb.copy()
    for iters in range(1, 101):
        if not np.any(active):
            break
        with np.errstate(invalid="ignore", divide="ignore"):
            c = x_hi - f_hi * (x_hi - x_lo) / (f_hi - f_lo)
        c = np.where(np.isfinite(c), c, 0.5 * (x_lo + x_hi))
        c = np.clip(c, np.minimum(x_lo, x_hi), np.maximum(x_lo, x_hi))
        fc = score(c)
        flip = np.sign(fc) != np.sign(f_hi)
        new_lo = np.where(flip, x_hi, x_lo)
        new_flo = np.where(flip, f_hi, f_lo * 0.5)
        x_lo = np.where(active, new_lo, x_lo)
        f_lo = np.where(active, new_flo, f_lo)
        x_hi = np.where(active, c, x_hi)
        f_hi = np.where(active, fc, f_hi)
        lg = np.where(active, c, lg)
        done = (fc == 0) | (np.abs(x_hi - x_lo) <= 1e-14 * (1.0 + np.abs(c)))
        active = active & ~done
    lg = np.where(pin_low, lg_lo, np.where(pin_high, lg_hi, lg))
    Sg = np.log1p(Z / np.exp(lg)[:, None]).sum(axis=1)
    alpha = _inner_alpha(Sg, n, lo, hi, lam)
    resid = np.abs(score(lg))
    a_hi = min(hi, -1.0 - 1e-12) if lam is not None else hi
    alpha_pinned = (alpha <= lo) | (alpha >= a_hi)
    return alpha, lg, alpha_pinned, pinned, resid, iters


def mle_batch(Z, alpha_box=(-20.0, -0.1), gamma_box=(1e-6, 1e6), tol=1e-8, lam=None):
    """Maximum likelihood for each row of ``Z``.

    Returns arrays ``alpha, gamma, ok`` where ``ok`` is False for rows whose
    fit diverged (degenerate data or an unresolved score root).
    """
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    s = Z.mean(axis=1)
    good = s > 0
    s_safe = np.where(good, s, 1.0)
    Zs = Z / s_safe[:, None]
    lg_lo = np.log(gamma_box[0] / s_safe)
    lg_hi = np.log(gamma_box[1] / s_safe)
    alpha, lg, _, g_pin, resid, _ = _profile_rows(Zs, alpha_box[0], alpha_box[1], lg_lo, lg_hi, lam)
    gamma = np.clip(np.exp(lg) * s_safe, *gamma_box)
    ok = good & (g_pin | (resid <= max(tol, 1e-6) * Z.shape[1]))
    return alpha, gamma, ok


def _fit_profile(z, cfg: EstimatorConfig, lam):
    zs, s = _standardize(z)
    n = z.size
    lo, hi = cfg.alpha_box
    lg_lo = np.array([math.log(cfg.gamma_box[0] / s)])
    lg_hi = np.array([math.log(cfg.gamma_box[1] / s)])
    alpha, lg, a_pin, g_pin, resid, iters = _profile_rows(zs[None, :], lo, hi, lg_lo, lg_hi, lam)
    a = float(alpha[0])
    g = float(np.clip(math.exp(float(lg[0])) * s, *cfg.gamma_box))
    p = TextureParams(a, g)
    obj = loglik(z, p)
    if lam is not None:
        obj += float(mple_penalty(a, lam))
        S = float(np.sum(np.log1p(z / g)))
        r_alpha = abs(n / a + S - lam / (1.0 + a) ** 2)
    else:
        r_alpha = abs(loglik_grad(z, p)[0])
    r = max(r_alpha, float(resid[0]))
    if a_pin[0] or g_pin[0]:
        status = Status.BOUNDARY
    elif r <= cfg.tol * n:
        status = Status.CONVERGED
    else:
        status = Status.DIVERGED
    return p, status, obj, int(iters), r


def fit_mle(sample, cfg: EstimatorConfig | None = None) -> FitResult:
    """Maximum likelihood through the closed-form profile alpha(gamma) = -n / sum ln(1 + z/gamma)."""
    cfg = cfg or EstimatorConfig("MLE")
    return _timed(lambda z: _fit_profile(z, cfg, None), sample, cfg, "MLE")


def fit_mple(sample, cfg: EstimatorConfig | None = None) -> FitResult:
    """Penalized maximum likelihood with the barrier lam/(1 + alpha) on alpha < -1."""
    cfg = cfg or EstimatorConfig("MPLE")
    return _timed(lambda z: _fit_profile(z, cfg, cfg.mple_lambda), sample, cfg, "MPLE")


# ------------------------------------------------------------- closed forms


def _in_box(a, g, cfg):
    lo, hi = cfg.alpha_box
    glo, ghi = cfg.gamma_box
    return lo < a < hi and glo < g < ghi


def _clip_params(a, g, cfg):
    if not math.isfinite(a):
        a = cfg.alpha_box[0] if a < 0 or math.isnan(a) else cfg.alpha_box[1]
    if not math.isfinite(g):
        g = cfg.gamma_box[1]
    return TextureParams(float(np.clip(a, *cfg.alpha_box)), float(np.clip(g, *cfg.gamma_box)))


def _closed_form_result(z, a, g, valid, cfg):
    if not valid:
        p = _clip_params(a if a < 0 else cfg.alpha_box[1], g if g > 0 else cfg.gamma_box[0], cfg)
        return p, Status.DIVERGED, math.nan, 0, math.nan
    status = Status.CONVERGED if _in_box(a, g, cfg) else Status.BOUNDARY
    p = _clip_params(a, g, cfg)
    return p, status, loglik(z, p), 0, 0.0


def mom_estimate(mean: float, var: float) -> tuple[float, float]:
    """Moment estimates from a mean and a variance (unchecked)."""
    d = mean * mean - var
    return 2.0 * var / d, mean * (mean * mean + var) / (var - mean * mean)


def pwm_estimate(mean: float, theta: float) -> tuple[float, float]:
    """Probability-weighted-moment estimates from the mean and theta = M_{1,0,1}."""
    return (mean - 2.0 * theta) / (4.0 * theta - mean), 2.0 * theta * mean / (mean - 4.0 * theta)


def pwm_theta(sample) -> float:
    """theta = n^-1 sum (n - i)/(n - 1) z_(i) over ascending order statistics."""
    z = np.sort(as_array(sample))
    n = z.size
    i = np.arange(1, n + 1)
    return float(np.sum((n - i) / (n - 1.0) * z) / n)


def fit_mom(sample, cfg: EstimatorConfig | None = None) -> FitResult:
    cfg = cfg or EstimatorConfig("MOM")

    def run(z):
        m, v = float(np.mean(z)), float(np.var(z, ddof=1))
        if not v > m * m:
            return _closed_form_result(z, math.nan, math.nan, False, cfg)
        a, g = mom_estimate(m, v)
        return _closed_form_result(z, a, g, True, cfg)

    return _timed(run, sample, cfg, "MOM")


def fit_pwm(sample, cfg: EstimatorConfig | None = None) -> FitResult:
    cfg = cfg or EstimatorConfig("PWM")

    def run(z):
        m, th = float(np.mean(z)), pwm_theta(z)
        if abs(4.0 * th - m) <= 1e-12 * max(abs(m), 1e-300):
            return _closed_form_result(z, math.nan, math.nan, False, cfg)
        a, g = pwm_estimate(m, th)
        return _closed_form_result(z, a, g, a < 0 and g > 0, cfg)

    return _timed(run, sample, cfg, "PWM")


# -------------------------------------------------------------------- LME


def _lme_h(lb, zs, r):
    """Estimating function in log(b) for standardized data; vectorized over lb."""
    lb = np.atleast_1d(lb)
    L = np.log1p(np.exp(lb)[:, None] * zs[None, :])
    xi = L.mean(axis=1)
    with np.errstate(over="ignore"):
        return np.mean(np.exp((-r / xi)[:, None] * L), axis=1) - 1.0 / (1.0 + r), xi


def fit_lme(sample, cfg: EstimatorConfig | None = None) -> FitResult:
    """Likelihood-moment estimator in b = 1/gamma.

    Given b, xi(b) = mean ln(1 + b z); b solves mean (1 + b z)^(-r/xi) = 1/(1 + r).
    """
    cfg = cfg or EstimatorConfig("LME")

    def run(z):
        zs, s = _standardize(z)
        r = cfg.lme_r
        lb_lo = math.log(s / cfg.gamma_box[1])
        lb_hi = math.log(s / cfg.gamma_box[0])
        G = int(math.ceil(_GRID_PER_DECADE * (lb_hi - lb_lo) / math.log(10.0))) + 1
        grid = np.linspace(lb_lo, lb_hi, G)
        h, xi = _lme_h(grid, zs, r)
        finite = np.isfinite(h)
        roots = []
        for j in np.nonzero(finite[:-1] & finite[1:] & (np.sign(h[:-1]) != np.sign(h[1:])))[0]:
            if h[j] == 0:
                roots.append(grid[j])
                continue
            roots.append(brentq(lambda x: _lme_h(x, zs, r)[0][0], grid[j], grid[j + 1], xtol=1e-14, rtol=1e-15))
        if not roots:
            j = int(np.nanargmin(np.where(finite, np.abs(h), np.inf))) if np.any(finite) else 0
            p = _clip_params(-1.0 / xi[j], s * math.exp(-grid[j]), cfg)
            return p, Status.DIVERGED, math.nan, G, math.nan
        cands = []
        for lb in roots:
            hv, xv = _lme_h(lb, zs, r)
            a, g = -1.0 / xv[0], s * math.exp(-lb)
            p = _clip_params(a, g, cfg)
            cands.append((loglik(z, p), p, a, g, abs(hv[0])))
        obj, p, a, g, res = max(cands, key=lambda c: c[0])
        status = Status.CONVERGED if _in_box(a, g, cfg) else Status.BOUNDARY
        if status is Status.CONVERGED and not res <= cfg.tol:
            status = Status.DIVERGED
        return p, status, obj, G, res

    return _timed(run, sample, cfg, "LME")


# ------------------------------------------------------ 2-D objective methods


def _mdpd_funcs(zs, omega):
    c = 1.0 + 1.0 / omega

    def f(x):
        a, lg = x
        L = np.log1p(zs * math.exp(-lg))
        logf = math.log(-a) - lg + (a - 1.0) * L
        d = (1.0 - a) * (1.0 + omega) - 1.0
        integral = math.exp((1.0 + omega) * math.log(-a) - omega * lg - math.log(d))
        return integral - c * float(np.mean(np.expm1(omega * logf)))

    def grad(x):
        a, lg = x
        g = math.exp(lg)
        L = np.log1p(zs / g)
        logf = math.log(-a) - lg + (a - 1.0) * L
        fw = np.exp(omega * logf)
        d = (1.0 - a) * (1.0 + omega) - 1.0
        integral = math.exp((1.0 + omega) * math.log(-a) - omega * lg - math.log(d))
        dla = 1.0 / a + L
        dlg = -1.0 + (1.0 - a) * zs / (g + zs)
        ga = integral * (1.0 + omega) * (1.0 / a + 1.0 / d) - (1.0 + omega) * float(np.mean(fw * dla))
        gg = -integral * omega - (1.0 + omega) * float(np.mean(fw * dlg))
        return np.array([ga, gg])

    return f, grad


def _mgf_funcs(zs_sorted, stat):
    def parts(x):
        a, lg = x
        L = np.log1p(zs_sorted * math.exp(-lg))
        s = np.exp(a * L)
        u = -np.expm1(a * L)
        return a, lg, L, s, u

    def f(x):
        _, _, _, s, u = parts(x)
        return gof.gof_stat(stat, u, s)

    def grad(x):
        a, lg, L, s, u = parts(x)
        dS = gof.gof_grad(stat, u, s)
        du_da = -s * L
        du_dlg = s * a * zs_sorted / (math.exp(lg) + zs_sorted)
        return np.array([dS @ du_da, dS @ du_dlg])

    return f, grad


_START_ALPHAS = (-0.5, -1.5, -3.0, -6.0, -12.0)
_START_SCALE_MULT = (1.0, 4.0, 0.5, 2.0, 0.25)  # one Latin-square transversal


def _starts(zs, lo, hi, lg_lo, lg_hi):
    med = float(np.median(zs)) or float(np.mean(zs))
    pts = []
    for a0, m in zip(_START_ALPHAS, _START_SCALE_MULT):
        a0 = float(np.clip(a0, lo + 0.05 * (hi - lo), hi - 0.05 * (hi - lo)))
        g0 = med / math.expm1(-math.log(2.0) / a0) * m
        pts.append(np.array([a0, float(np.clip(math.log(g0), lg_lo + 1e-3, lg_hi - 1e-3))]))
    return pts


def _simplex(f, x0, bounds, xatol, fatol, maxiter):
    step = np.array([max(0.2 * abs(x0[0]), 0.05), 0.3])
    sim = np.array([x0, x0 + [step[0], 0.0], x0 + [0.0, step[1]]])
    for k, (lo_b, hi_b) in enumerate(bounds):
        sim[:, k] = np.clip(sim[:, k], lo_b, hi_b)
    if np.allclose(sim[1], sim[0]):
        sim[1, 0] = x0[0] - step[0]
    if np.allclose(sim[2], sim[0]):
        sim[2, 1] = x0[1] - step[1]
    res = minimize(
        f,
        x0,
        method="Nelder-Mead",
        bounds=bounds,
        options=dict(xatol=xatol, fatol=fatol, maxiter=maxiter, initial_simplex=sim),
    )
    return res


def _newton_polish(f, grad, x, bounds, max_steps=30):
    """Damped Newton on the gradient with a finite-difference Hessian."""
    fx = f(x)
    gx = grad(x)
    steps = 0
    for steps in range(1, max_steps + 1):
        if not (np.all(np.isfinite(gx)) and math.isfinite(fx)):
            break
        h = 1e-6 * (1.0 + np.abs(x))
        H = np.empty((2, 2))
        for k in range(2):
            e = np.zeros(2)
            e[k] = h[k]
            H[:, k] = (grad(x + e) - grad(x - e)) / (2.0 * h[k])
        H = 0.5 * (H + H.T)
        if not np.all(np.isfinite(H)) or np.linalg.det(H) <= 0 or H[0, 0] <= 0:
            break
        dx = -np.linalg.solve(H, gx)
        accepted = False
        for _ in range(20):
            xn = np.array([np.clip(x[k] + dx[k], *bounds[k]) for k in range(2)])
            fn = f(xn)
            gn = grad(xn)
            if math.isfinite(fn) and (fn < fx or (fn <= fx + 1e-13 * abs(fx) and np.linalg.norm(gn) < np.linalg.norm(gx))):
                accepted = True
                break
            dx = dx / 2.0
        if not accepted:
            break
        moved = np.max(np.abs(xn - x))
        x, fx, gx = xn, fn, gn
        if moved <= 1e-13 * (1.0 + np.max(np.abs(x))):
            break
    return x, fx, gx, steps


def _fit_2d(z, cfg: EstimatorConfig, kind: str):
    zs, s = _standardize(z)
    n = z.size
    lo, hi = cfg.alpha_box
    lg_lo = math.log(cfg.gamma_box[0] / s)
    lg_hi = math.log(cfg.gamma_box[1] / s)
    bounds = [(lo, hi), (lg_lo, lg_hi)]
    if kind == "MDPD":
        f, grad = _mdpd_funcs(zs, cfg.mdpd_omega)
        smooth = True
    else:
        f, grad = _mgf_funcs(np.sort(zs), cfg.mgf_stat)
        smooth = cfg.mgf_stat != "KS"

    def safe(x):
        with np.errstate(all="ignore"):
            v = f(x)
        return v if np.isfinite(v) else math.inf

    iters = 0
    best = None
    for x0 in _starts(zs, lo, hi, lg_lo, lg_hi):
        r = _simplex(safe, x0, bounds, 1e-4, 1e-10, cfg.max_iter)
        iters += int(r.nit)
        if best is None or r.fun < best.fun:
            best = r
    final = _simplex(safe, best.x, bounds, cfg.tol, cfg.tol * 1e-4, cfg.max_iter)
    iters += int(final.nit)
    x, fx = final.x, final.fun
    exhausted = final.nit >= cfg.max_iter
    if smooth and math.isfinite(fx):
        with np.errstate(all="ignore"):
            x, fx, gx, k = _newton_polish(safe, grad, x, bounds)
        iters += k
        resid = float(np.linalg.norm(gx))
    else:
        resid = 0.0 if not exhausted else math.inf

    a, g = float(x[0]), float(math.exp(x[1]) * s)
    p = _clip_params(a, g, cfg)
    edge_a = min(a - lo, hi - a) <= 1e-7 * (1.0 + abs(a))
    edge_g = min(x[1] - lg_lo, lg_hi - x[1]) <= 1e-7 * (1.0 + abs(x[1]))
    if not math.isfinite(fx):
        status = Status.DIVERGED
    elif edge_a or edge_g:
        status = Status.BOUNDARY
    elif exhausted or not resid <= cfg.tol * n:
        status = Status.DIVERGED
    else:
        status = Status.CONVERGED
    if kind == "MDPD":
        obj = fx * s ** (-cfg.mdpd_omega) - (1.0 + 1.0 / cfg.mdpd_omega)
    else:
        obj = fx
    return p, status, float(obj), iters, resid


def fit_mdpd(sample, cfg: EstimatorConfig | None = None) -> FitResult:
    """Minimum density power divergence with tuning ``cfg.mdpd_omega``."""
    cfg = cfg or EstimatorConfig("MDPD")
    return _timed(lambda z: _fit_2d(z, cfg, "MDPD"), sample, cfg, "MDPD")


def fit_mgf(sample, cfg: EstimatorConfig | None = None) -> FitResult:
    """Maximum goodness of fit: minimize ``cfg.mgf_stat`` over the parameters."""
    cfg = cfg or EstimatorConfig("MGF")
    return _timed(lambda z: _fit_2d(z, cfg, "MGF"), sample, cfg, cfg.label)


# ----------------------------------------------------------------- dispatch


def _timed(run, sample, cfg, label) -> FitResult:
    t0 = time.perf_counter()
    z = as_array(sample)
    if z.size < 2:
        return FitResult(None, Status.INSUFFICIENT, math.nan, 0, time.perf_counter() - t0, label)
    if not np.all(np.isfinite(z)) or np.any(z < 0):
        raise Gi0Error("sample values must be finite and nonnegative")
    if not np.any(z > 0):
        p = _clip_params(cfg.alpha_box[0], cfg.gamma_box[0], cfg)
        return FitResult(p, Status.DIVERGED, math.nan, 0, time.perf_counter() - t0, label)
    with np.errstate(all="ignore"):
        p, status, obj, iters, resid = run(z)
    return FitResult(p, status, float(obj), int(iters), time.perf_counter() - t0, label, float(resid))


_DISPATCH = {
    "MLE": fit_mle,
    "MPLE": fit_mple,
    "MOM": fit_mom,
    "PWM": fit_pwm,
    "LME": fit_lme,
    "MDPD": fit_mdpd,
    "MGF": fit_mgf,
}


def fit(sample, cfg: EstimatorConfig) -> FitResult:
    """Route to the estimator named by ``cfg.method``."""
    return _DISPATCH[cfg.method](sample, cfg)


def with_method(cfg: EstimatorConfig, method: str) -> EstimatorConfig:
    return replace(cfg, method=method)
