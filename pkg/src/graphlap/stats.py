"""Summary statistics, the Kolmogorov-Smirnov distance to a centered normal, correlation."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

# Asymptotic critical values c_alpha of sqrt(m) * KS for a fully specified law;
# reject at level alpha when KS > c_alpha / sqrt(m).
KS_CRITICAL = {0.10: 1.22, 0.05: 1.36, 0.01: 1.63, 0.001: 1.95}


class StatsError(ValueError):
    pass


def ks_threshold(m: int, alpha: float = 0.05) -> float:
    """Reference threshold ``c_alpha / sqrt(m)`` from :data:`KS_CRITICAL`."""
    return KS_CRITICAL[alpha] / math.sqrt(m)


def normal_cdf(x: float) -> float:
    """Standard normal CDF via ``erfc`` (accurate to ~1e-16 absolute)."""
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def _clean(samples) -> np.ndarray:
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise StatsError("samples must be nonempty")
    if np.isnan(x).any():
        raise StatsError("samples contain NaN")
    return x


def ks_statistic(samples, scale: float) -> float:
    """``sup_x |F_m(x) - Phi(x / scale)|`` over the empirical CDF F_m."""
    if not scale > 0:
        raise StatsError("scale must be positive")
    x = np.sort(_clean(samples), kind="stable")
    m = x.size
    cdf = ndtr(x / scale)
    i = np.arange(1, m + 1)
    upper = np.max(i / m - cdf)
    lower = np.max(cdf - (i - 1) / m)
    return float(max(upper, lower))


def correlation(pairs) -> float:
    """Pearson correlation of ``(x, y)`` pairs."""
    a = np.asarray(pairs, dtype=float)
    if a.ndim != 2 or a.shape[1] != 2 or len(a) < 2:
        raise StatsError("need at least two (x, y) pairs")
    if np.isnan(a).any():
        raise StatsError("pairs contain NaN")
    x = a[:, 0] - a[:, 0].mean()
    y = a[:, 1] - a[:, 1].mean()
    sx = math.sqrt(float(x @ x))
    sy = math.sqrt(float(y @ y))
    if sx == 0.0 or sy == 0.0:
        raise StatsError("degenerate variance")
    return float(np.clip((x @ y) / (sx * sy), -1.0, 1.0))


@dataclass(frozen=True)
class SampleSummary:
    count: int
    mean: float
    variance: float
    skewness: float
    excess_kurtosis: float
    min: float
    max: float


def summarize(samples) -> SampleSummary:
    """Moments with an unbiased (n - 1) variance; higher moments use population form."""
    x = _clean(samples)
    m = x.size
    mean = float(np.mean(x))
    mean = min(max(mean, float(x.min())), float(x.max()))
    dev = x - mean
    var = float(dev @ dev) / (m - 1) if m > 1 else 0.0
    sd = math.sqrt(float(np.mean(dev ** 2)))
    if sd > 0:
        z = dev / sd  # standardize first so tiny spreads do not underflow
        skew = float(np.mean(z ** 3))
        kurt = float(np.mean(z ** 4)) - 3.0
    else:
        skew = kurt = 0.0
    return SampleSummary(m, mean, var, skew, kurt, float(x.min()), float(x.max()))


def median_quartiles(samples) -> tuple:
    x = _clean(samples)
    q1, med, q3 = np.quantile(x, [0.25, 0.5, 0.75])
    return float(q1), float(med), float(q3)


def loglog_slope(xs, ys) -> float:
    """Least-squares slope of log y against log x."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if len(x) < 2 or not (np.all(x > 0) and np.all(y > 0)):
        raise StatsError("slope needs at least two positive values")
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])
