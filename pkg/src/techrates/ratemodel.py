"""Log-linear mapping between mean normalized centrality and improvement rate.

The shipped default coefficients estimate a domain's yearly fractional
improvement rate K from its mean normalized centrality X as

    K = exp(slope * X + intercept) * exp(sigma2 / 2)

with slope 6.217219, intercept -4.974221 and a retransformation
(smearing) factor exp(sigma2/2) applied when exponentiating a log-scale
prediction; sigma2 defaults to 0 and can be overridden or re-estimated.
``train`` fits fresh coefficients by ordinary least squares of ln K on X
and sets sigma2 to the residual variance RSS / (n - 2). The smearing
variance is a single corpus-level constant, not a per-domain quantity.

Also provides projection of a performance quantity forward in time,
a size-vs-rate regression, and a sensitivity comparison between rate
estimates computed before and after domain deduplication.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEFAULT_SLOPE = 6.217219
DEFAULT_INTERCEPT = -4.974221


class TrainingError(ValueError):
    """Raised when a training set cannot identify the regression."""


@dataclass(frozen=True)
class RegressionModel:
    slope: float
    intercept: float
    sigma2: float
    n_train: int
    provenance: str

    def to_json(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "sigma2": self.sigma2,
            "n_train": self.n_train,
            "provenance": self.provenance,
        }


DEFAULT_MODEL = RegressionModel(
    slope=DEFAULT_SLOPE,
    intercept=DEFAULT_INTERCEPT,
    sigma2=0.0,
    n_train=0,
    provenance="builtin-default",
)


@dataclass(frozen=True)
class TrainingRecord:
    name: str
    x: float
    k: float


@dataclass(frozen=True)
class RegressionDiagnostics:
    se_slope: float
    se_intercept: float
    r_squared: float
    rss: float


@dataclass(frozen=True)
class RateEstimate:
    domain_code: str
    mean_centrality: float
    k: float
    scored_patent_count: int


def _ols(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float, float, float, float]:
    """Simple OLS fit. Returns (slope, intercept, se_slope, se_intercept, r2, rss)."""
    n = x.size
    x_bar = x.mean()
    y_bar = y.mean()
    sxx = float(((x - x_bar) ** 2).sum())
    if sxx == 0.0:
        raise TrainingError("predictor has zero variance; regression is unidentifiable")
    sxy = float(((x - x_bar) * (y - y_bar)).sum())
    slope = sxy / sxx
    intercept = y_bar - slope * x_bar
    residuals = y - (slope * x + intercept)
    rss = float((residuals**2).sum())
    tss = float(((y - y_bar) ** 2).sum())
    if n > 2:
        s2 = rss / (n - 2)
        se_slope = math.sqrt(s2 / sxx)
        se_intercept = math.sqrt(s2 * (1.0 / n + x_bar**2 / sxx))
    else:
        se_slope = float("nan")
        se_intercept = float("nan")
    r_squared = 1.0 - rss / tss if tss > 0 else float("nan")
    return slope, intercept, se_slope, se_intercept, r_squared, rss


def train(records: list[TrainingRecord]) -> tuple[RegressionModel, RegressionDiagnostics]:
    """Fit ln K = slope * X + intercept by OLS.

    Requires at least three records, finite X, strictly positive K, and
    non-constant X. sigma2 is the unbiased residual variance RSS/(n-2).
    """
    if len(records) < 3:
        raise TrainingError(f"need at least 3 training records, got {len(records)}")
    x = np.array([r.x for r in records], dtype=np.float64)
    k = np.array([r.k for r in records], dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise TrainingError("training X values must be finite")
    if not (np.all(np.isfinite(k)) and np.all(k > 0)):
        raise TrainingError("training K values must be finite and positive")
    y = np.log(k)
    slope, intercept, se_slope, se_intercept, r_squared, rss = _ols(x, y)
    sigma2 = rss / (len(records) - 2)
    model = RegressionModel(slope, intercept, sigma2, len(records), provenance="trained")
    return model, RegressionDiagnostics(se_slope, se_intercept, r_squared, rss)


def estimate_k(
    model: RegressionModel,
    mean_centrality: float,
    domain_code: str = "",
    scored_patent_count: int = 0,
) -> RateEstimate:
    """Predicted improvement rate for one mean-centrality value."""
    if not math.isfinite(mean_centrality):
        raise ValueError("mean centrality must be finite")
    k = math.exp(model.slope * mean_centrality + model.intercept) * math.exp(model.sigma2 / 2.0)
    return RateEstimate(domain_code, mean_centrality, k, scored_patent_count)


def invert_k(model: RegressionModel, k: float) -> float:
    """Mean centrality whose prediction equals ``k``; inverse of estimate_k."""
    if not (math.isfinite(k) and k > 0):
        raise ValueError("k must be finite and positive")
    return (math.log(k) - model.sigma2 / 2.0 - model.intercept) / model.slope


def project_performance(q0: float, k: float, t0: float, t: float) -> float:
    """Performance at time t given level q0 at t0 and exponential rate k."""
    if not (math.isfinite(q0) and q0 > 0):
        raise ValueError("q0 must be finite and positive")
    return q0 * math.exp(k * (t - t0))


@dataclass(frozen=True)
class SizeRegression:
    slope: float
    intercept: float
    se_slope: float
    se_intercept: float
    r_squared: float
    n: int

    def to_json(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "se_slope": self.se_slope,
            "se_intercept": self.se_intercept,
            "r_squared": self.r_squared,
            "n": self.n,
        }


def size_regression(estimates: list[RateEstimate], size_of: dict[str, int]) -> SizeRegression:
    """OLS of K on domain size, answering how strongly size drives rate."""
    if len(estimates) < 3:
        raise TrainingError(f"need at least 3 estimates, got {len(estimates)}")
    x = np.array([size_of[e.domain_code] for e in estimates], dtype=np.float64)
    y = np.array([e.k for e in estimates], dtype=np.float64)
    slope, intercept, se_slope, se_intercept, r_squared, _ = _ols(x, y)
    return SizeRegression(slope, intercept, se_slope, se_intercept, r_squared, len(estimates))


@dataclass(frozen=True)
class SensitivityReport:
    """Distribution of rate changes caused by domain deduplication.

    ``diff`` rows describe K_original - K_deduplicated, in rate units;
    ``pct_diff`` rows describe 100 * (K_original - K_deduplicated) /
    K_deduplicated. Statistics use population variance.
    """

    n: int
    mean_original: float
    std_original: float
    mean_dedup: float
    std_dedup: float
    diff: dict[str, float]
    pct_diff: dict[str, float]

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "original": {"mean": self.mean_original, "std": self.std_original},
            "deduplicated": {"mean": self.mean_dedup, "std": self.std_dedup},
            "difference": dict(self.diff),
            "percent_difference": dict(self.pct_diff),
        }


def _spread(values: np.ndarray) -> dict[str, float]:
    return {
        "mean": float(values.mean()),
        "std": float(values.std()),
        "min": float(values.min()),
        "max": float(values.max()),
    }


def dedup_sensitivity(
    original: list[RateEstimate], deduplicated: list[RateEstimate]
) -> SensitivityReport:
    """Compare per-domain rates computed on pre- and post-dedup patent sets."""
    orig_by_code = {e.domain_code: e for e in original}
    dedup_by_code = {e.domain_code: e for e in deduplicated}
    if set(orig_by_code) != set(dedup_by_code):
        missing = set(orig_by_code) ^ set(dedup_by_code)
        raise ValueError(f"estimate sets cover different domains: {sorted(missing)[:5]}")
    if not orig_by_code:
        raise ValueError("no estimates to compare")
    codes = sorted(orig_by_code)
    k_orig = np.array([orig_by_code[c].k for c in codes], dtype=np.float64)
    k_dedup = np.array([dedup_by_code[c].k for c in codes], dtype=np.float64)
    diff = k_orig - k_dedup
    pct = 100.0 * diff / k_dedup
    return SensitivityReport(
        n=len(codes),
        mean_original=float(k_orig.mean()),
        std_original=float(k_orig.std()),
        mean_dedup=float(k_dedup.mean()),
        std_dedup=float(k_dedup.std()),
        diff=_spread(diff),
        pct_diff=_spread(pct),
    )
