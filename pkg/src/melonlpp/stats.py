"""Small statistics helpers for the Monte Carlo runs."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats as sps

from .errors import DomainError


@dataclass(frozen=True, eq=False)
class EmpiricalSample:
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        v = np.asarray(self.values, float).ravel()
        if v.size == 0:
            raise DomainError("empty sample")
        object.__setattr__(self, "values", v)

    @property
    def size(self) -> int:
        return self.values.size

    def mean(self) -> float:
        return float(self.values.mean())

    def std(self) -> float:
        return float(self.values.std(ddof=1)) if self.size > 1 else 0.0

    def quantile(self, q: float) -> float:
        return ecdf_quantile(self.values, q)


def ecdf_quantile(values, q: float) -> float:
    """Smallest order statistic v with ecdf(v) >= q."""
    if not 0.0 <= q <= 1.0:
        raise DomainError("q must lie in [0, 1]")
    v = np.sort(np.asarray(values, float).ravel())
    if v.size == 0:
        raise DomainError("empty sample")
    i = max(1, int(np.ceil(q * v.size)))
    return float(v[i - 1])


def ks_distance(a, b) -> float:
    """Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|."""
    # only the statistic is used: skip the exact p-value, and its tiny-sample warnings
    with np.errstate(divide="ignore", invalid="ignore"):
        res = sps.ks_2samp(np.ravel(a), np.ravel(b), method="asymp")
    return float(res.statistic)


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    stderr: float
    n_points: int


def loglog_slope(x, y) -> SlopeFit:
    """Least-squares slope of log y against log x."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    if x.shape != y.shape or x.size < 2:
        raise DomainError("need at least two matched points")
    if np.any(x <= 0) or np.any(y <= 0):
        raise DomainError("log-log fit needs positive data")
    r = sps.linregress(np.log(x), np.log(y))
    return SlopeFit(float(r.slope), float(r.intercept), float(r.stderr), x.size)


def envelope_N(n, x, w: float = 1.0, a: float = 2.0, b: float = 1.0):
    """2 sqrt(n x) + sqrt(x) n^{-1/6} (a + b log^{2/3}(n^{1/3} |log(x / w)| + 1))."""
    x = np.asarray(x, float)
    if n <= 0 or w <= 0 or np.any(x <= 0):
        raise DomainError("n, w and x must be positive")
    lg = np.log(n ** (1 / 3) * np.abs(np.log(x / w)) + 1.0) ** (2 / 3)
    out = 2 * np.sqrt(n * x) + np.sqrt(x) * n ** (-1 / 6) * (a + b * lg)
    return float(out) if out.ndim == 0 else out
