"""Order-selection goodness-of-fit baseline for one-sample comparisons.

Residuals against a fully specified null function are expanded in the
half-cosine basis sqrt(2) cos(pi j x); the statistic is the largest
normalized cumulative sum of squared standardized coefficients, compared
to a critical value that depends only on the level.  The noise variance
comes from the first-difference (Rice) estimator on responses ordered
by x.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaincc

from .errors import DomainError, NumericalError

_SERIES_TOL = 1e-12
_SERIES_CAP = 100_000


@dataclass(frozen=True)
class EhResult:
    """Outcome of the order-selection test."""

    statistic: float
    critical_value: float
    reject: bool
    sigma_hat_rice: float


def rice_variance(Y) -> float:
    """First-difference variance estimate on responses ordered by ascending x."""
    Y = np.asarray(Y, dtype=float).ravel()
    if Y.size < 2:
        raise DomainError("need at least two observations")
    return float(np.sum(np.diff(Y) ** 2) / (2.0 * (Y.size - 1)))


def _survival_sum(c: float) -> float:
    """sum_j j^-1 P(chi2_j > j c), truncated once the tail term < 1e-12."""
    total = 0.0
    for j in range(1, _SERIES_CAP + 1):
        term = gammaincc(j / 2.0, j * c / 2.0) / j
        total += term
        if term < _SERIES_TOL:
            break
    return total


@lru_cache(maxsize=None)
def eh_critical_value(alpha: float) -> float:
    """Critical value c_alpha solving 1 - exp(-sum_j j^-1 P(chi2_j > j c)) = alpha.

    Bisection to 1e-6 in c; valid for alpha in (0, 0.5).
    """
    if not 0.0 < alpha < 0.5:
        raise DomainError(f"alpha must be in (0, 0.5), got {alpha}")

    def excess(c):
        return -math.expm1(-_survival_sum(c)) - alpha

    lo, hi = 1.0, 64.0
    if excess(lo) < 0 or excess(hi) > 0:
        raise NumericalError("failed to bracket the critical value")
    while hi - lo > 1e-6:
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def eh_test(X, Y, null_fn, alpha: float = 0.05) -> EhResult:
    """Order-selection test of H0: E[y | x] = null_fn(x) on [0, 1].

    null_fn must be vectorized over a 1D array of inputs.
    """
    X = np.asarray(X, dtype=float).ravel()
    Y = np.asarray(Y, dtype=float).ravel()
    n = X.size
    if n < 3 or Y.size != n:
        raise DomainError("need n >= 3 with matching X and Y")
    if np.any((X < 0) | (X > 1)):
        raise DomainError("design points must lie in [0, 1]")
    order = np.argsort(X, kind="stable")
    x, r = X[order], (Y - np.asarray(null_fn(X), dtype=float).ravel())[order]
    sigma2 = rice_variance(r)
    if sigma2 <= 0.0:
        raise NumericalError("degenerate Rice variance estimate")
    j = np.arange(1, n)
    phi = (math.sqrt(2.0) / n) * (np.cos(math.pi * np.outer(j, x)) @ r)
    cum = np.cumsum(n * phi ** 2 / sigma2)
    statistic = float(np.max(cum / j))
    c_alpha = eh_critical_value(alpha)
    return EhResult(
        statistic=statistic,
        critical_value=c_alpha,
        reject=statistic > c_alpha,
        sigma_hat_rice=sigma2,
    )
