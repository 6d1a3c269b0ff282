"""Compound Poisson subordinators with nonnegative drift.

A subordinator here is the process

    L_t = mu * t + sum_{i <= N_t} J_i,

with ``N`` a Poisson process of rate ``jump_rate`` and iid nonnegative jumps
``J_i``. The module evaluates its Laplace exponent, materialises paths on a
finite horizon and samples first-passage times exactly (no time grid).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, ClassVar

import numpy as np
from scipy import integrate

from .errors import DegenerateModelError, DomainError

__all__ = [
    "JumpLaw",
    "Uniform01",
    "Exponential",
    "Pareto",
    "jump_law_from_dict",
    "SubordinatorSpec",
    "SubordinatorPath",
    "laplace_exponent",
    "sample_path",
    "value_at",
    "sample_value",
    "first_passage",
    "first_passage_times",
]


class JumpLaw:
    """Law of the jump sizes of a compound Poisson subordinator.

    Subclasses are frozen dataclasses implementing ``sample``,
    ``laplace_transform`` (``E[exp(-x J)]``) and ``mean``. They may override
    ``laplace_complement`` with a form that keeps relative accuracy near 0.
    """

    name: ClassVar[str] = ""
    _registry: ClassVar[dict[str, type["JumpLaw"]]] = {}

    def __init_subclass__(cls, **kwargs: Any) -> None:
        super().__init_subclass__(**kwargs)
        if cls.name:
            JumpLaw._registry[cls.name] = cls

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        raise NotImplementedError

    def laplace_transform(self, x: float) -> float:
        raise NotImplementedError

    def laplace_complement(self, x: float) -> float:
        """``1 - E[exp(-x J)]``."""
        return 1.0 - self.laplace_transform(x)

    def mean(self) -> float:
        raise NotImplementedError

    @property
    def param(self) -> float | None:
        """Primary numeric parameter, used as a flat column in result tables."""
        return None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"law": self.name}
        for key, value in vars(self).items():
            out[key] = value
        return out

    def label(self) -> str:
        params = [f"{v:g}" for v in vars(self).values()]
        return f"{self.name}({','.join(params)})" if params else self.name


@dataclass(frozen=True)
class Uniform01(JumpLaw):
    name: ClassVar[str] = "uniform01"

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.random(size)

    def laplace_transform(self, x: float) -> float:
        if x == 0.0:
            return 1.0
        return -math.expm1(-x) / x

    def laplace_complement(self, x: float) -> float:
        if x < 1e-3:
            return x * (0.5 - x * (1.0 / 6.0 - x / 24.0))
        return (x + math.expm1(-x)) / x

    def mean(self) -> float:
        return 0.5


@dataclass(frozen=True)
class Exponential(JumpLaw):
    rate: float = 1.0
    name: ClassVar[str] = "exponential"

    def __post_init__(self) -> None:
        if not self.rate > 0:
            raise DomainError(f"exponential rate must be positive, got {self.rate}")

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.exponential(1.0 / self.rate, size)

    def laplace_transform(self, x: float) -> float:
        return self.rate / (self.rate + x)

    def laplace_complement(self, x: float) -> float:
        return x / (self.rate + x)

    def mean(self) -> float:
        return 1.0 / self.rate

    @property
    def param(self) -> float:
        return self.rate


@dataclass(frozen=True)
class Pareto(JumpLaw):
    """Classical Pareto law with survival ``(scale / x)**alpha`` on ``[scale, inf)``."""

    alpha: float = 1.5
    scale: float = 1.0
    name: ClassVar[str] = "pareto"

    def __post_init__(self) -> None:
        if not (self.alpha > 0 and self.scale > 0):
            raise DomainError(
                f"pareto needs alpha > 0 and scale > 0, got alpha={self.alpha}, scale={self.scale}"
            )

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        # numpy's pareto is the Lomax law; shift to support [1, inf) then scale
        return self.scale * (1.0 + rng.pareto(self.alpha, size))

    def laplace_transform(self, x: float) -> float:
        return 1.0 - _pareto_complement(self.alpha, self.scale, float(x))

    def laplace_complement(self, x: float) -> float:
        return _pareto_complement(self.alpha, self.scale, float(x))

    def mean(self) -> float:
        if self.alpha <= 1:
            return math.inf
        return self.alpha * self.scale / (self.alpha - 1.0)

    @property
    def param(self) -> float:
        return self.alpha


@lru_cache(maxsize=4096)
def _pareto_complement(alpha: float, scale: float, x: float) -> float:
    if x == 0.0:
        return 0.0
    # integrating 1 - E[exp(-x J)] = int x exp(-x j) P(J > j) dj by parts and
    # substituting j = scale * exp(w) gives, with c = x * scale,
    #   -expm1(-c) + c * int_0^inf exp((1 - alpha) w - c exp(w)) dw,
    # a sum of positive terms with a smooth integrand
    c = x * scale
    log_c = math.log(c)

    def integrand(w: float) -> float:
        return math.exp((1.0 - alpha) * w - math.exp(log_c + w))

    # the integrand turns from its power-law regime to super-exponential decay near w = log(1/c)
    # and is below 1e-300 once c exp(w) > 750
    knee = max(0.0, -log_c)
    stop = max(knee, math.log(750.0) - log_c)
    total = 0.0
    for a, b in ((0.0, knee), (knee, stop)):
        if b > a:
            total += integrate.quad(integrand, a, b, epsabs=0.0, epsrel=1e-12, limit=500)[0]
    return -math.expm1(-c) + c * total


def jump_law_from_dict(data: dict[str, Any]) -> JumpLaw:
    """Build a jump law from ``{"law": name, **params}``."""
    data = dict(data)
    name = data.pop("law", None)
    try:
        cls = JumpLaw._registry[name]
    except KeyError:
        known = ", ".join(sorted(JumpLaw._registry))
        raise DomainError(f"unknown jump law {name!r}; expected one of {known}") from None
    try:
        return cls(**data)
    except TypeError as exc:
        raise DomainError(f"bad parameters for jump law {name!r}: {exc}") from None


@dataclass(frozen=True)
class SubordinatorSpec:
    """Drift ``mu``, Poisson ``jump_rate`` and ``jump_law`` of a subordinator."""

    mu: float
    jump_rate: float
    jump_law: JumpLaw = Uniform01()

    def __post_init__(self) -> None:
        if self.mu < 0 or self.jump_rate < 0:
            raise DomainError(
                f"drift and jump rate must be nonnegative, got mu={self.mu}, jump_rate={self.jump_rate}"
            )
        if self.mu == 0 and self.jump_rate == 0:
            raise DegenerateModelError("mu = 0 and jump_rate = 0: the subordinator never passes any barrier")

    def psi(self, x: float) -> float:
        return laplace_exponent(self, x)

    def mean_rate(self) -> float:
        """``E[L_1] = mu + jump_rate * E[J]``."""
        if self.jump_rate == 0:
            return self.mu
        return self.mu + self.jump_rate * self.jump_law.mean()

    def to_dict(self) -> dict[str, Any]:
        return {"mu": self.mu, "lambda": self.jump_rate, "jump": self.jump_law.to_dict()}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SubordinatorSpec":
        law = jump_law_from_dict(data.get("jump", {"law": "uniform01"}))
        return cls(mu=float(data["mu"]), jump_rate=float(data["lambda"]), jump_law=law)


@dataclass(frozen=True, eq=False)
class SubordinatorPath:
    """A path materialised up to ``horizon``.

    ``jump_epochs`` is strictly increasing and ``jump_sizes`` has the same
    length.
    """

    jump_epochs: np.ndarray
    jump_sizes: np.ndarray
    mu: float
    horizon: float

    def __post_init__(self) -> None:
        epochs = np.asarray(self.jump_epochs, dtype=float)
        sizes = np.asarray(self.jump_sizes, dtype=float)
        if epochs.shape != sizes.shape or epochs.ndim != 1:
            raise DomainError("jump_epochs and jump_sizes must be 1-d arrays of equal length")
        if epochs.size and (epochs[0] <= 0 or epochs[-1] > self.horizon or np.any(np.diff(epochs) <= 0)):
            raise DomainError("jump epochs must be strictly increasing within (0, horizon]")
        if np.any(sizes < 0):
            raise DomainError("jump sizes must be nonnegative")
        object.__setattr__(self, "jump_epochs", epochs)
        object.__setattr__(self, "jump_sizes", sizes)

    def __call__(self, t):
        return value_at(self, t)


def laplace_exponent(spec: SubordinatorSpec, x: float) -> float:
    """Return ``psi(x) = mu x + jump_rate (1 - E[exp(-x J)])``."""
    if not x >= 0:
        raise DomainError(f"Laplace exponent is defined for x >= 0, got {x}")
    x = float(x)
    if spec.jump_rate == 0:
        return spec.mu * x
    return spec.mu * x + spec.jump_rate * spec.jump_law.laplace_complement(x)


def sample_path(spec: SubordinatorSpec, horizon: float, rng: np.random.Generator) -> SubordinatorPath:
    """Sample the path on ``[0, horizon]``."""
    if not horizon > 0:
        raise DomainError(f"horizon must be positive, got {horizon}")
    count = rng.poisson(spec.jump_rate * horizon) if spec.jump_rate > 0 else 0
    epochs = np.sort(rng.uniform(0.0, horizon, count))
    sizes = spec.jump_law.sample(rng, count)
    return SubordinatorPath(epochs, sizes, spec.mu, float(horizon))


def value_at(path: SubordinatorPath, t):
    """Right-continuous path value ``mu t + sum of jumps with epoch <= t``.

    Accepts a scalar or an array of times.
    """
    times = np.asarray(t, dtype=float)
    if np.any(times < 0) or np.any(times > path.horizon):
        raise DomainError(f"t must lie in [0, {path.horizon}]")
    cum = np.concatenate(([0.0], np.cumsum(path.jump_sizes)))
    idx = np.searchsorted(path.jump_epochs, times, side="right")
    out = path.mu * times + cum[idx]
    return float(out) if out.ndim == 0 else out


def sample_value(spec: SubordinatorSpec, t: float, rng: np.random.Generator, size: int) -> np.ndarray:
    """Draw ``size`` independent copies of ``L_t`` without building paths."""
    if not t >= 0:
        raise DomainError(f"t must be nonnegative, got {t}")
    out = np.full(size, spec.mu * t)
    if spec.jump_rate == 0 or t == 0:
        return out
    counts = rng.poisson(spec.jump_rate * t, size)
    jumps = spec.jump_law.sample(rng, int(counts.sum()))
    owner = np.repeat(np.arange(size), counts)
    return out + np.bincount(owner, weights=jumps, minlength=size)


def first_passage_times(spec: SubordinatorSpec, barriers, rng: np.random.Generator) -> np.ndarray:
    """Exact first-passage times ``inf{t : L_t > b}``, one independent path per barrier.

    Jumps are generated one at a time for every path still below its
    barrier. Between jumps the drift is linear, so a crossing inside an
    inter-jump interval is solved in closed form. A jump landing exactly on
    the barrier does not count as a passage.
    """
    b = np.asarray(barriers, dtype=float)
    if np.any(~(b > 0)):
        raise DomainError("barriers must be positive")
    flat = b.ravel()
    if spec.jump_rate == 0:
        return (flat / spec.mu).reshape(b.shape)

    mu = spec.mu
    scale = 1.0 / spec.jump_rate
    out = np.empty_like(flat)
    active = np.arange(flat.size)
    t = np.zeros(flat.size)
    v = np.zeros(flat.size)
    while active.size:
        bar = flat[active]
        t_a = t[active]
        v_a = v[active]
        wait = rng.exponential(scale, active.size)
        if mu > 0:
            before = v_a + mu * wait
            crossed = before > bar
            if crossed.any():
                out[active[crossed]] = t_a[crossed] + (bar[crossed] - v_a[crossed]) / mu
                keep = ~crossed
                active, bar, t_a, before, wait = active[keep], bar[keep], t_a[keep], before[keep], wait[keep]
        else:
            before = v_a
        t_a = t_a + wait
        v_a = before + spec.jump_law.sample(rng, active.size)
        jumped = v_a > bar
        out[active[jumped]] = t_a[jumped]
        keep = ~jumped
        active = active[keep]
        t[active] = t_a[keep]
        v[active] = v_a[keep]
    return out.reshape(b.shape)


def first_passage(spec: SubordinatorSpec, barrier: float, rng: np.random.Generator) -> float:
    """Exact sample of the first time the subordinator strictly exceeds ``barrier``."""
    if not barrier > 0:
        raise DomainError(f"barrier must be positive, got {barrier}")
    return float(first_passage_times(spec, np.array([barrier]), rng)[0])
