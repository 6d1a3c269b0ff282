"""Levy-frailty Marshall-Olkin failure times.

Component ``i`` fails the first time a shared subordinator path strictly
exceeds its private standard exponential trigger ``eps_i``. All components of
one vector share the same path, which is what produces simultaneous failures.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .subordinator import SubordinatorSpec, first_passage_times

__all__ = [
    "TriggerSet",
    "sample_triggers",
    "kth_trigger",
    "passage_times_on_shared_path",
    "sample_failure_times",
    "sample_kth_failure",
    "sample_kth_failures",
]


@dataclass(frozen=True, eq=False)
class TriggerSet:
    n: int
    sorted_triggers: np.ndarray


def _check_n(n: int) -> int:
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n}")
    return int(n)


def sample_triggers(n: int, rng: np.random.Generator) -> TriggerSet:
    """``n`` iid Exp(1) triggers, sorted ascending."""
    n = _check_n(n)
    return TriggerSet(n, np.sort(rng.standard_exponential(n)))


def kth_trigger(n: int, k, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Sample the ``k``-th smallest of ``n`` iid Exp(1) triggers directly.

    Uses ``eps_{k:n} = -log(1 - U_{k:n})`` with ``U_{k:n} ~ Beta(k, n-k+1)``
    written as a ratio of gammas, ``log1p(X / Y)``, which keeps full relative
    precision at both ends of the order.
    """
    n = _check_n(n)
    k = np.asarray(k)
    if np.any(k < 1) or np.any(k > n):
        raise DomainError(f"k must lie in [1, {n}]")
    shape = k.shape if size is None else size
    x = rng.standard_gamma(np.broadcast_to(k, shape).astype(float))
    y = rng.standard_gamma(np.broadcast_to(n - k + 1, shape).astype(float))
    return np.log1p(x / y)


def passage_times_on_shared_path(
    spec: SubordinatorSpec, sorted_barriers: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """First-passage times of ONE path over every barrier in ``sorted_barriers``.

    The path is generated lazily in chunks of jumps until its pre-jump value
    exceeds the largest barrier. Each barrier is resolved by locating the first
    breakpoint of the path (pre-jump or post-jump value) strictly above it.
    """
    barriers = np.asarray(sorted_barriers, dtype=float)
    out = np.empty_like(barriers)
    if barriers.size == 0:
        return out
    if spec.jump_rate == 0:
        return barriers / spec.mu

    mu = spec.mu
    scale = 1.0 / spec.jump_rate
    t0 = 0.0
    v0 = 0.0
    start = 0
    chunk = 64
    while start < barriers.size:
        waits = rng.exponential(scale, chunk)
        jumps = spec.jump_law.sample(rng, chunk)
        epochs = t0 + np.cumsum(waits)
        cum = np.concatenate(([0.0], np.cumsum(jumps)))
        pre = v0 + mu * (epochs - t0) + cum[:-1]
        post = pre + jumps
        seg_t = np.concatenate(([t0], epochs[:-1]))
        seg_v = np.concatenate(([v0], post[:-1]))
        breakpoints = np.empty(2 * chunk)
        breakpoints[0::2] = pre
        breakpoints[1::2] = post

        rem = barriers[start:]
        pos = np.searchsorted(breakpoints, rem, side="right")
        resolved = int(np.searchsorted(pos, 2 * chunk, side="left"))
        pos = pos[:resolved]
        seg = pos // 2
        times = epochs[seg]
        drift = pos % 2 == 0
        if drift.any():
            s = seg[drift]
            times[drift] = seg_t[s] + (rem[:resolved][drift] - seg_v[s]) / mu
        out[start : start + resolved] = times
        start += resolved
        t0 = float(epochs[-1])
        v0 = float(post[-1])
        chunk = min(2 * chunk, 1 << 16)
    return out


def sample_failure_times(spec: SubordinatorSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """One LFMO vector of ``n`` failure times, in component order."""
    n = _check_n(n)
    eps = rng.standard_exponential(n)
    order = np.argsort(eps, kind="stable")
    times = np.empty(n)
    times[order] = passage_times_on_shared_path(spec, eps[order], rng)
    return times


def sample_kth_failures(spec: SubordinatorSpec, n: int, k, rng: np.random.Generator) -> np.ndarray:
    """Independent draws of ``T_{k:n}``, one per entry of ``k``."""
    return first_passage_times(spec, kth_trigger(n, k, rng), rng)


def sample_kth_failure(spec: SubordinatorSpec, n: int, k: int, rng: np.random.Generator) -> float:
    """Exact sample of the ``k``-th smallest failure time among ``n`` components."""
    n = _check_n(n)
    if int(k) != k or not 1 <= k <= n:
        raise DomainError(f"k must be an integer in [1, {n}], got {k}")
    return float(sample_kth_failures(spec, n, np.array([int(k)]), rng)[0])
