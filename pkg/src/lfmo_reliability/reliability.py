"""System failure times for mixed coherent systems with LFMO components.

By the signature mixture identity, a system with signature ``s`` fails at
the ``K``-th component failure with ``K ~ s`` drawn independently of the
lifetimes, so ``T_sys`` is sampled as one order statistic. The limit objects
are first-passage times of the subordinator over ``-log(1 - Q)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, DegenerateModelError, DomainError
from .lfmo import kth_trigger
from .signature import BetaLaw, FailureFractionLaw, PointMass, Signature, sample_failure_index
from .subordinator import SubordinatorSpec, first_passage_times, sample_value

__all__ = [
    "MTTF_CAP",
    "SystemModel",
    "LimitModel",
    "Estimate",
    "sample_system_failure",
    "reliability_mc",
    "mttf_exact",
    "limit_passage_sample",
    "limit_reliability",
    "limit_reliability_reversed",
]

MTTF_CAP = 30


@dataclass(frozen=True)
class SystemModel:
    signature: Signature
    subordinator: SubordinatorSpec

    @property
    def n(self) -> int:
        return self.signature.n


@dataclass(frozen=True)
class LimitModel:
    q_law: FailureFractionLaw
    subordinator: SubordinatorSpec


@dataclass(frozen=True)
class Estimate:
    """Monte Carlo estimate with its standard error and, if known, the exact value."""

    estimate: float
    se: float
    closed_form: float | None = None

    def __iter__(self):
        yield self.estimate
        yield self.se


def sample_system_failure(model: SystemModel, rng: np.random.Generator, size: int | None = None):
    """Exact draws of the system failure time."""
    m = 1 if size is None else size
    k = sample_failure_index(model.signature, rng, m)
    eps = kth_trigger(model.n, k, rng)
    times = first_passage_times(model.subordinator, eps, rng)
    return float(times[0]) if size is None else times


def _tail_estimate(hits: np.ndarray) -> Estimate:
    p = float(hits.mean())
    return Estimate(p, math.sqrt(p * (1.0 - p) / hits.size))


def reliability_mc(model: SystemModel, t: float, samples: int, rng: np.random.Generator) -> Estimate:
    """Estimate ``P(T_sys > t)`` with a binomial standard error."""
    if samples < 2:
        raise DomainError("samples must be at least 2")
    if t < 0:
        raise DomainError(f"t must be nonnegative, got {t}")
    return _tail_estimate(sample_system_failure(model, rng, samples) > t)


def mttf_exact(model: SystemModel, cap: int = MTTF_CAP) -> float:
    """Mean system failure time from the alternating double sum over ``psi(1..n)``.

    Binomial magnitudes are exact integers; every term is formed once and the
    whole sum is accumulated with ``math.fsum`` so the only rounding is in the
    individual terms. The sum cancels badly as ``n`` grows, hence ``cap``.
    """
    n = model.n
    if n > cap:
        raise CapacityError(f"exact MTTF is limited to n <= {cap} (got {n}); use Monte Carlo instead")
    psi = [model.subordinator.psi(l) for l in range(1, n + 1)]
    if any(p <= 0 for p in psi):
        raise DegenerateModelError("psi(l) = 0 for some l; the subordinator is degenerate")
    s = model.signature.s
    terms = []
    for k in range(1, n + 1):
        if s[k - 1] == 0:
            continue
        for l in range(n - k + 1, n + 1):
            mag = math.comb(n, l) * math.comb(l - 1, n - k)
            sign = -1.0 if (l - n + k - 1) % 2 else 1.0
            terms.append(sign * (mag * float(s[k - 1])) / psi[l - 1])
    value = math.fsum(terms)
    scale = math.fsum(abs(x) for x in terms)
    if not value > 0:
        raise CapacityError("alternating sum lost all precision; use Monte Carlo instead")
    if scale / value * 1e-16 > 1e-8:
        warnings.warn(f"MTTF sum has condition number {scale / value:.2e}", RuntimeWarning, stacklevel=2)
    return value


def limit_passage_sample(limit: LimitModel, rng: np.random.Generator, size: int | None = None):
    """Draws of ``tau_{-log(1-Q)}`` with ``Q`` independent of the path."""
    m = 1 if size is None else size
    rng_q, rng_path = rng.spawn(2)
    barriers = limit.q_law.sample_barrier(rng_q, m)
    times = first_passage_times(limit.subordinator, barriers, rng_path)
    return float(times[0]) if size is None else times


def limit_closed_form(limit: LimitModel, t: float) -> float | None:
    """``P(L_t < -log(1-Q))`` where it is available in closed form."""
    spec = limit.subordinator
    if isinstance(limit.q_law, BetaLaw):
        return math.exp(-spec.psi(limit.q_law.b) * t)
    if isinstance(limit.q_law, PointMass) and spec.jump_rate == 0:
        return 1.0 if spec.mu * t < -math.log1p(-limit.q_law.p) else 0.0
    return None


def limit_reliability(limit: LimitModel, t: float, samples: int, rng: np.random.Generator) -> Estimate:
    """Estimate ``P(L_t < -log(1 - Q))`` from independent draws of ``L_t`` and ``Q``."""
    if samples < 2:
        raise DomainError("samples must be at least 2")
    if t < 0:
        raise DomainError(f"t must be nonnegative, got {t}")
    rng_q, rng_path = rng.spawn(2)
    barriers = limit.q_law.sample_barrier(rng_q, samples)
    values = sample_value(limit.subordinator, t, rng_path, samples)
    est = _tail_estimate(values < barriers)
    return Estimate(est.estimate, est.se, limit_closed_form(limit, t))


def limit_reliability_reversed(
    b: float, spec: SubordinatorSpec, t: float, samples: int, rng: np.random.Generator
) -> Estimate:
    """Estimate ``1 - E[(1 - exp(-L_t))**b]``."""
    if not b > 0:
        raise DomainError(f"b must be positive, got {b}")
    if samples < 2:
        raise DomainError("samples must be at least 2")
    values = sample_value(spec, t, rng, samples)
    y = 1.0 - (-np.expm1(-values)) ** b
    mean = float(y.mean())
    se = float(y.std(ddof=1) / math.sqrt(samples))
    closed = math.exp(-spec.psi(1.0) * t) if b == 1 else None
    return Estimate(mean, se, closed)
