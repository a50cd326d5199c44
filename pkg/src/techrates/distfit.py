"""Distribution fitting and normality testing for rate and centrality samples.

Three candidate families are supported: lognormal, exponentially modified
Gaussian (a Gaussian plus an independent exponential), and normal. Each
fit is maximum likelihood with the location parameter profiled over a
grid and then refined numerically; fit quality is reported as the sum of
squared differences between the fitted density and a histogram density
with ceil(sqrt(n)) equal-width bins, together with AIC and BIC.

The three normality tests are implemented from their published formulas
(the test suite cross-validates them against scipy):

- combined skewness/kurtosis chi-square test (D'Agostino's skewness
  transform plus the Anscombe-Glynn kurtosis transform)
- Kolmogorov-Smirnov against the fitted normal, with the Stephens
  effective sample size sqrt(n) + 0.12 + 0.11/sqrt(n) and the
  alternating-series tail probability
- Anderson-Darling with the case-3 (both parameters estimated) critical
  values [0.576, 0.656, 0.787, 0.918, 1.092] divided by
  1 + 4/n - 25/n^2, at significance levels 15, 10, 5, 2.5 and 1 percent
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize
from scipy.special import ndtr
from scipy.stats import exponnorm, lognorm, norm

FAMILIES = ("lognormal", "emg", "normal")

_MIN_SAMPLES_FIT = 30
_MIN_SAMPLES_TEST = 20


class FitError(RuntimeError):
    """Raised when a maximum-likelihood fit fails to converge."""


@dataclass(frozen=True)
class FitResult:
    family: str
    params: dict[str, float]
    loglik: float
    sse: float
    aic: float
    bic: float
    n: int

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "params": dict(self.params),
            "loglik": self.loglik,
            "sse": self.sse,
            "aic": self.aic,
            "bic": self.bic,
            "n": self.n,
        }


def _check_samples(samples: np.ndarray, minimum: int) -> np.ndarray:
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("samples must be one-dimensional")
    if x.size < minimum:
        raise ValueError(f"need at least {minimum} samples, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise ValueError("samples must be finite")
    if float(x.std()) == 0.0:
        raise ValueError("samples are constant; nothing to fit")
    return x


def _histogram_sse(x: np.ndarray, pdf) -> float:
    bins = math.ceil(math.sqrt(x.size))
    density, edges = np.histogram(x, bins=bins, density=True)
    centers = 0.5 * (edges[:-1] + edges[1:])
    return float(((density - pdf(centers)) ** 2).sum())


def _information(loglik: float, k_params: int, n: int) -> tuple[float, float]:
    aic = 2.0 * k_params - 2.0 * loglik
    bic = k_params * math.log(n) - 2.0 * loglik
    return aic, bic


def _loc_grid(x: np.ndarray) -> list[float]:
    xmin = float(x.min())
    span = float(x.max()) - xmin
    grid = [xmin - span * g for g in np.geomspace(1e-7, 1.0, 25)]
    if xmin > 0:
        grid.append(0.0)
    return grid


def _fit_lognormal(x: np.ndarray) -> FitResult:
    xmin = float(x.min())

    def profile(loc: float) -> tuple[float, float, float]:
        # Given loc, shape and scale have closed-form MLEs on ln(x - loc).
        if loc >= xmin:
            return math.inf, 1.0, 1.0
        y = np.log(x - loc)
        shape = float(y.std())
        if shape <= 0:
            return math.inf, 1.0, 1.0
        scale = math.exp(float(y.mean()))
        nll = -float(lognorm.logpdf(x, shape, loc=loc, scale=scale).sum())
        return nll, shape, scale

    candidates = sorted(_loc_grid(x))
    scores = [profile(c)[0] for c in candidates]
    best = int(np.argmin(scores))
    lo = candidates[max(0, best - 1)]
    hi = min(candidates[min(len(candidates) - 1, best + 1)], xmin - 1e-12 * max(1.0, abs(xmin)))
    if lo < hi:
        refined = optimize.minimize_scalar(
            lambda c: profile(c)[0], bounds=(lo, hi), method="bounded"
        )
        loc = float(refined.x) if refined.fun <= scores[best] else candidates[best]
    else:
        loc = candidates[best]
    nll, shape, scale = profile(loc)
    if not math.isfinite(nll):
        raise FitError("lognormal fit failed: no admissible location")
    loglik = -nll
    frozen = lognorm(shape, loc=loc, scale=scale)
    aic, bic = _information(loglik, 3, x.size)
    return FitResult(
        "lognormal",
        {"shape": shape, "loc": loc, "scale": scale},
        loglik,
        _histogram_sse(x, frozen.pdf),
        aic,
        bic,
        x.size,
    )


def _emg_start(x: np.ndarray, loc: float) -> tuple[float, float]:
    """Moment start for (K, scale) with the location pinned."""
    excess = max(float(x.mean()) - loc, 1e-9)
    variance = float(x.var())
    sigma_sq = variance - excess**2
    if sigma_sq <= 0:
        sigma = math.sqrt(variance) / 2.0
    else:
        sigma = math.sqrt(sigma_sq)
    return max(excess / sigma, 1e-3), sigma


def _fit_emg(x: np.ndarray) -> FitResult:
    def negloglik(k: float, loc: float, scale: float) -> float:
        if k <= 0 or scale <= 0:
            return math.inf
        value = -float(exponnorm.logpdf(x, k, loc=loc, scale=scale).sum())
        return value if math.isfinite(value) else math.inf

    def inner(loc: float) -> tuple[float, float, float]:
        k0, s0 = _emg_start(x, loc)
        res = optimize.minimize(
            lambda p: negloglik(math.exp(p[0]), loc, math.exp(p[1])),
            x0=[math.log(k0), math.log(s0)],
            method="Nelder-Mead",
            options={"maxiter": 2000, "xatol": 1e-8, "fatol": 1e-10},
        )
        return float(res.fun), math.exp(res.x[0]), math.exp(res.x[1])

    candidates = sorted(set(_loc_grid(x)) | {float(np.quantile(x, q)) for q in (0.01, 0.05, 0.15, 0.3)})
    best_nll, best = math.inf, None
    for loc in candidates:
        nll, k, scale = inner(loc)
        if nll < best_nll:
            best_nll, best = nll, (k, loc, scale)
    if best is None or not math.isfinite(best_nll):
        raise FitError("EMG fit failed: no admissible start")
    k0, loc0, s0 = best
    refined = optimize.minimize(
        lambda p: negloglik(math.exp(p[0]), p[1], math.exp(p[2])),
        x0=[math.log(k0), loc0, math.log(s0)],
        method="Nelder-Mead",
        options={"maxiter": 4000, "xatol": 1e-9, "fatol": 1e-11},
    )
    if math.isfinite(refined.fun) and refined.fun <= best_nll:
        k, loc, scale = math.exp(refined.x[0]), float(refined.x[1]), math.exp(refined.x[2])
        best_nll = float(refined.fun)
    else:
        k, loc, scale = k0, loc0, s0
    loglik = -best_nll
    frozen = exponnorm(k, loc=loc, scale=scale)
    aic, bic = _information(loglik, 3, x.size)
    return FitResult(
        "emg",
        {"shape": k, "loc": loc, "scale": scale},
        loglik,
        _histogram_sse(x, frozen.pdf),
        aic,
        bic,
        x.size,
    )


def _fit_normal(x: np.ndarray) -> FitResult:
    loc = float(x.mean())
    scale = float(x.std())
    loglik = float(norm.logpdf(x, loc=loc, scale=scale).sum())
    frozen = norm(loc=loc, scale=scale)
    aic, bic = _information(loglik, 2, x.size)
    return FitResult(
        "normal",
        {"loc": loc, "scale": scale},
        loglik,
        _histogram_sse(x, frozen.pdf),
        aic,
        bic,
        x.size,
    )


def fit_distribution(samples, family: str) -> FitResult:
    """Maximum-likelihood fit of one family to a sample (n >= 30)."""
    x = _check_samples(samples, _MIN_SAMPLES_FIT)
    if family == "lognormal":
        return _fit_lognormal(x)
    if family == "emg":
        return _fit_emg(x)
    if family == "normal":
        return _fit_normal(x)
    raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")


def fit_all(samples) -> dict[str, FitResult]:
    """Fit every supported family and report the lowest-sse winner."""
    return {family: fit_distribution(samples, family) for family in FAMILIES}


# --- normality tests ------------------------------------------------------

ANDERSON_SIGNIFICANCE = (15.0, 10.0, 5.0, 2.5, 1.0)
_ANDERSON_BASE = (0.576, 0.656, 0.787, 0.918, 1.092)


def _skewness_z(x: np.ndarray) -> float:
    n = x.size
    centered = x - x.mean()
    m2 = float((centered**2).mean())
    m3 = float((centered**3).mean())
    g1 = m3 / m2**1.5
    y = g1 * math.sqrt((n + 1) * (n + 3) / (6.0 * (n - 2)))
    beta2 = 3.0 * (n**2 + 27 * n - 70) * (n + 1) * (n + 3) / ((n - 2) * (n + 5) * (n + 7) * (n + 9))
    w2 = -1.0 + math.sqrt(2.0 * (beta2 - 1.0))
    delta = 1.0 / math.sqrt(0.5 * math.log(w2))
    alpha = math.sqrt(2.0 / (w2 - 1.0))
    if y == 0:
        y = 1.0
    return delta * math.log(y / alpha + math.sqrt((y / alpha) ** 2 + 1.0))


def _kurtosis_z(x: np.ndarray) -> float:
    n = x.size
    centered = x - x.mean()
    m2 = float((centered**2).mean())
    m4 = float((centered**4).mean())
    b2 = m4 / m2**2
    expected = 3.0 * (n - 1) / (n + 1)
    variance = 24.0 * n * (n - 2) * (n - 3) / ((n + 1) ** 2 * (n + 3) * (n + 5))
    standardized = (b2 - expected) / math.sqrt(variance)
    root_beta1 = (
        6.0 * (n * n - 5 * n + 2) / ((n + 7) * (n + 9))
        * math.sqrt(6.0 * (n + 3) * (n + 5) / (n * (n - 2) * (n - 3)))
    )
    a = 6.0 + 8.0 / root_beta1 * (2.0 / root_beta1 + math.sqrt(1.0 + 4.0 / root_beta1**2))
    term1 = 1.0 - 2.0 / (9.0 * a)
    denominator = 1.0 + standardized * math.sqrt(2.0 / (a - 4.0))
    term2 = math.copysign(abs((1.0 - 2.0 / a) / abs(denominator)) ** (1.0 / 3.0), denominator)
    return (term1 - term2) / math.sqrt(2.0 / (9.0 * a))


def dagostino_k2(samples) -> tuple[float, float]:
    """Combined skewness and kurtosis statistic with its chi-square(2) p."""
    x = _check_samples(samples, _MIN_SAMPLES_TEST)
    statistic = _skewness_z(x) ** 2 + _kurtosis_z(x) ** 2
    # chi-square survival with 2 dof has the closed form exp(-x/2)
    return statistic, math.exp(-statistic / 2.0)


def _kolmogorov_sf(lam: float) -> float:
    if lam <= 0:
        return 1.0
    total = 0.0
    for j in range(1, 101):
        term = 2.0 * (-1.0) ** (j - 1) * math.exp(-2.0 * j * j * lam * lam)
        total += term
        if abs(term) < 1e-12:
            break
    return min(max(total, 0.0), 1.0)


def ks_normal(samples) -> tuple[float, float]:
    """KS distance from the MLE-fitted normal, with the Stephens p-value."""
    x = np.sort(_check_samples(samples, _MIN_SAMPLES_TEST))
    n = x.size
    u = ndtr((x - x.mean()) / x.std())
    grid = np.arange(1, n + 1) / n
    d = float(np.max(np.maximum(grid - u, u - (grid - 1.0 / n))))
    effective = math.sqrt(n) + 0.12 + 0.11 / math.sqrt(n)
    return d, _kolmogorov_sf(effective * d)


def anderson_darling_normal(samples) -> tuple[float, tuple[float, ...]]:
    """Anderson-Darling statistic and its estimated-parameter critical values."""
    x = np.sort(_check_samples(samples, _MIN_SAMPLES_TEST))
    n = x.size
    u = ndtr((x - x.mean()) / x.std(ddof=1))
    u = np.clip(u, 1e-300, 1.0 - 1e-16)
    i = np.arange(1, n + 1)
    a2 = -n - float(((2 * i - 1) * (np.log(u) + np.log1p(-u[::-1]))).mean())
    correction = 1.0 + 4.0 / n - 25.0 / (n * n)
    critical = tuple(base / correction for base in _ANDERSON_BASE)
    return a2, critical


@dataclass(frozen=True)
class NormalityReport:
    n: int
    dagostino_stat: float
    dagostino_p: float
    ks_stat: float
    ks_p: float
    anderson_stat: float
    anderson_critical: tuple[float, ...]
    anderson_significance: tuple[float, ...] = ANDERSON_SIGNIFICANCE

    def rejects(self, alpha: float = 0.01) -> dict[str, bool]:
        """Whether each test rejects normality at the given level.

        The Anderson-Darling table only covers the listed significance
        levels; the closest level at or below alpha*100 is used.
        """
        eligible = [
            i for i, s in enumerate(self.anderson_significance) if s <= alpha * 100.0 + 1e-12
        ]
        index = eligible[0] if eligible else len(self.anderson_significance) - 1
        return {
            "dagostino": self.dagostino_p < alpha,
            "ks": self.ks_p < alpha,
            "anderson": self.anderson_stat > self.anderson_critical[index],
        }

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "dagostino": {"statistic": self.dagostino_stat, "p_value": self.dagostino_p},
            "ks": {"statistic": self.ks_stat, "p_value": self.ks_p},
            "anderson": {
                "statistic": self.anderson_stat,
                "critical_values": list(self.anderson_critical),
                "significance_levels_percent": list(self.anderson_significance),
            },
        }


def normality_tests(samples) -> NormalityReport:
    """Run all three normality tests on one sample (n >= 20)."""
    x = _check_samples(samples, _MIN_SAMPLES_TEST)
    k2_stat, k2_p = dagostino_k2(x)
    ks_stat, ks_p = ks_normal(x)
    ad_stat, ad_critical = anderson_darling_normal(x)
    return NormalityReport(
        n=x.size,
        dagostino_stat=k2_stat,
        dagostino_p=k2_p,
        ks_stat=ks_stat,
        ks_p=ks_p,
        anderson_stat=ad_stat,
        anderson_critical=ad_critical,
    )
