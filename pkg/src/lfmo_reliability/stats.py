"""Two-sample Kolmogorov-Smirnov test and small summary helpers."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = ["KsResult", "kolmogorov_sf", "ks_two_sample", "mean_and_se", "relative_error"]

_SERIES_EPS = 1e-12


@dataclass(frozen=True)
class KsResult:
    statistic: float
    p_value: float
    n1: int
    n2: int


def kolmogorov_sf(x: float) -> float:
    """Survival function of the limiting Kolmogorov distribution, ``P(K > x)``.

    Uses the alternating series ``2 sum (-1)**(k-1) exp(-2 k**2 x**2)`` for
    ``x >= 1`` and the Jacobi theta form of the CDF below that, where the
    alternating series converges slowly. Both stop once a term drops below
    1e-12.
    """
    if x < 0.05:
        # the CDF is below 1e-200 here
        return 1.0
    if x < 1.0:
        c = -(math.pi**2) / (8.0 * x * x)
        total = 0.0
        k = 1
        while True:
            term = math.exp(c * (2 * k - 1) ** 2)
            total += term
            if term < _SERIES_EPS:
                break
            k += 1
        cdf = math.sqrt(2.0 * math.pi) / x * total
        return min(1.0, max(0.0, 1.0 - cdf))
    total = 0.0
    k = 1
    while True:
        term = math.exp(-2.0 * k * k * x * x)
        total += term if k % 2 else -term
        if term < _SERIES_EPS:
            break
        k += 1
    return min(1.0, max(0.0, 2.0 * total))


def ks_two_sample(a, b) -> KsResult:
    """Two-sided two-sample KS test with the asymptotic p-value.

    The statistic is the largest gap between the right-continuous empirical
    CDFs, evaluated at every pooled observation, so ties are handled exactly.
    """
    a = np.sort(np.asarray(a, dtype=float).ravel())
    b = np.sort(np.asarray(b, dtype=float).ravel())
    n1, n2 = a.size, b.size
    if n1 == 0 or n2 == 0:
        raise DomainError("both samples must be nonempty")
    if min(n1, n2) < 30:
        warnings.warn("asymptotic KS p-values are unreliable below 30 observations", stacklevel=2)
    pooled = np.concatenate((a, b))
    fa = np.searchsorted(a, pooled, side="right") / n1
    fb = np.searchsorted(b, pooled, side="right") / n2
    d = float(np.max(np.abs(fa - fb)))
    en = math.sqrt(n1 * n2 / (n1 + n2))
    return KsResult(d, kolmogorov_sf(d * en), n1, n2)


def mean_and_se(sample) -> tuple[float, float]:
    """Sample mean and its standard error ``s / sqrt(N)`` (unbiased ``s``)."""
    x = np.asarray(sample, dtype=float).ravel()
    if x.size < 2:
        raise DomainError("need at least two observations")
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))


def relative_error(estimate: float, reference: float) -> float:
    """Signed ``(estimate - reference) / reference``."""
    if reference == 0:
        raise DomainError("reference must be nonzero")
    return (estimate - reference) / reference
