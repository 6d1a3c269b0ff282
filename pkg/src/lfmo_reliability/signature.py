"""Structure functions, system signatures and failure-fraction laws.

A signature ``s`` of a system with ``n`` components gives, for each ``k``,
the probability that the system dies exactly at the ``k``-th component
failure. Any signature is realised by picking a k-out-of-n system at random
with probability ``s_k``.

Structure functions are stored as truth tables indexed by the integer whose
bit ``i`` (least significant first) is the state of component ``i + 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import integrate, stats

from .errors import CapacityError, DomainError, ValidationError

__all__ = [
    "MAX_EXACT_COMPONENTS",
    "StructureFunction",
    "Signature",
    "FailureFractionLaw",
    "DiscreteFractionLaw",
    "BetaLaw",
    "PointMass",
    "TabulatedDensity",
    "SignatureFamily",
    "signature_from_structure",
    "kofn_signature",
    "powerlaw_signature",
    "reversed_powerlaw_signature",
    "binomial_signature",
    "normalization_asymptotics",
    "sandwich_bounds",
    "integral_bounds",
    "hypothesis_b_statistic",
    "CDRow",
    "CDReport",
    "hypothesis_cd_check",
    "scaled_weight",
    "domination_envelope",
    "sample_failure_index",
]

MAX_EXACT_COMPONENTS = 25
SUM_TOL = 1e-12


# --------------------------------------------------------------------------
# structure functions


def _popcount(n: int) -> np.ndarray:
    idx = np.arange(1 << n, dtype=np.uint32)
    return np.bitwise_count(idx).astype(np.int64)


@dataclass(frozen=True, eq=False)
class StructureFunction:
    """Deterministic boolean function on component states, as a truth table."""

    n: int
    table: np.ndarray = field(repr=False)
    name: str = "custom"

    def __post_init__(self) -> None:
        if self.n < 1:
            raise DomainError(f"n must be positive, got {self.n}")
        if self.n > MAX_EXACT_COMPONENTS:
            raise CapacityError(
                f"exact structure functions are limited to n <= {MAX_EXACT_COMPONENTS}, got {self.n}"
            )
        table = np.asarray(self.table, dtype=bool)
        if table.shape != (1 << self.n,):
            raise ValidationError(f"truth table must have 2**{self.n} entries, got {table.shape}")
        object.__setattr__(self, "table", table)

    # builtins

    @classmethod
    def k_out_of_n(cls, n: int, k: int) -> "StructureFunction":
        """k-out-of-n:F system; it fails at the ``k``-th component failure."""
        if not 1 <= k <= n:
            raise DomainError(f"k must lie in [1, {n}], got {k}")
        if n > MAX_EXACT_COMPONENTS:
            raise CapacityError(f"n <= {MAX_EXACT_COMPONENTS} required, got {n}")
        return cls(n, _popcount(n) >= n - k + 1, name=f"{k}-out-of-{n}")

    @classmethod
    def series(cls, n: int) -> "StructureFunction":
        sf = cls.k_out_of_n(n, 1)
        return cls(n, sf.table, name="series")

    @classmethod
    def parallel(cls, n: int) -> "StructureFunction":
        sf = cls.k_out_of_n(n, n)
        return cls(n, sf.table, name="parallel")

    @classmethod
    def bridge5(cls) -> "StructureFunction":
        """Two-terminal bridge: edges 1=s-a, 2=s-b, 3=a-b, 4=a-t, 5=b-t."""
        paths = [(0, 3), (1, 4), (0, 2, 4), (1, 2, 3)]
        idx = np.arange(32)
        table = np.zeros(32, dtype=bool)
        for path in paths:
            mask = sum(1 << i for i in path)
            table |= (idx & mask) == mask
        return cls(5, table, name="bridge-5")

    @classmethod
    def builtin(cls, name: str, n: int | None = None, k: int | None = None) -> "StructureFunction":
        if name == "bridge-5":
            return cls.bridge5()
        if n is None:
            raise DomainError(f"builtin {name!r} needs n")
        if name == "series":
            return cls.series(n)
        if name == "parallel":
            return cls.parallel(n)
        if name == "k-out-of-n":
            if k is None:
                raise DomainError("builtin 'k-out-of-n' needs k")
            return cls.k_out_of_n(n, k)
        raise DomainError(f"unknown builtin structure {name!r}")

    @classmethod
    def from_function(cls, n: int, fn: Callable[[tuple[int, ...]], bool], name: str = "custom"):
        if n > MAX_EXACT_COMPONENTS:
            raise CapacityError(f"n <= {MAX_EXACT_COMPONENTS} required, got {n}")
        table = np.fromiter(
            (bool(fn(tuple((x >> i) & 1 for i in range(n)))) for x in range(1 << n)),
            dtype=bool,
            count=1 << n,
        )
        return cls(n, table, name=name)

    # truth-table file: first line n, then "bitstring value" per configuration;
    # character i of the bitstring is the state of component i + 1

    @classmethod
    def read(cls, path: str | Path) -> "StructureFunction":
        lines = [ln.strip() for ln in Path(path).read_text().splitlines()]
        lines = [ln for ln in lines if ln and not ln.startswith("#")]
        if not lines:
            raise ValidationError(f"{path}: empty truth-table file")
        try:
            n = int(lines[0])
        except ValueError:
            raise ValidationError(f"{path}: first line must be the number of components") from None
        if n < 1:
            raise ValidationError(f"{path}: n must be positive")
        if n > MAX_EXACT_COMPONENTS:
            raise CapacityError(f"{path}: n = {n} exceeds {MAX_EXACT_COMPONENTS}")
        table = np.zeros(1 << n, dtype=bool)
        seen = np.zeros(1 << n, dtype=bool)
        for lineno, line in enumerate(lines[1:], start=2):
            parts = line.split()
            if len(parts) != 2 or len(parts[0]) != n or set(parts[0]) - {"0", "1"} or parts[1] not in {"0", "1"}:
                raise ValidationError(f"{path}:{lineno}: expected '<{n}-bit string> <0|1>', got {line!r}")
            idx = int(parts[0][::-1], 2)
            if seen[idx]:
                raise ValidationError(f"{path}:{lineno}: duplicate configuration {parts[0]}")
            seen[idx] = True
            table[idx] = parts[1] == "1"
        if not seen.all():
            missing = int(np.flatnonzero(~seen)[0])
            raise ValidationError(f"{path}: configuration {_bits(missing, n)} is missing")
        return cls(n, table, name=Path(path).stem)

    def write(self, path: str | Path) -> None:
        lines = [str(self.n)]
        lines += [f"{_bits(x, self.n)} {int(v)}" for x, v in enumerate(self.table)]
        Path(path).write_text("\n".join(lines) + "\n")

    def __call__(self, x: Sequence[int]) -> bool:
        if len(x) != self.n:
            raise DomainError(f"expected {self.n} component states")
        return bool(self.table[sum(int(bool(v)) << i for i, v in enumerate(x))])

    def monotonicity_violation(self) -> tuple[str, str] | None:
        """Return a pair ``(x, y)`` with ``x <= y`` but Phi(x)=1, Phi(y)=0, if any."""
        idx = np.arange(1 << self.n)
        for i in range(self.n):
            low = idx[(idx >> i) & 1 == 0]
            high = low | (1 << i)
            bad = self.table[low] & ~self.table[high]
            if bad.any():
                x = int(low[np.argmax(bad)])
                return _bits(x, self.n), _bits(x | (1 << i), self.n)
        return None

    def check_monotone(self) -> None:
        pair = self.monotonicity_violation()
        if pair is not None:
            raise ValidationError(
                f"structure {self.name!r} is not monotone: Phi({pair[0]}) = 1 but Phi({pair[1]}) = 0"
            )

    def irrelevant_components(self) -> list[int]:
        """1-based indices of components that never change the output."""
        idx = np.arange(1 << self.n)
        out = []
        for i in range(self.n):
            low = idx[(idx >> i) & 1 == 0]
            if np.array_equal(self.table[low], self.table[low | (1 << i)]):
                out.append(i + 1)
        return out

    def check_coherent(self) -> None:
        self.check_monotone()
        irrelevant = self.irrelevant_components()
        if irrelevant:
            raise ValidationError(f"structure {self.name!r} has irrelevant components {irrelevant}")


def _bits(x: int, n: int) -> str:
    return "".join(str((x >> i) & 1) for i in range(n))


# --------------------------------------------------------------------------
# signatures


@dataclass(frozen=True, eq=False)
class Signature:
    """Probability vector on failure ranks ``1..n``."""

    s: np.ndarray
    label: str = ""

    def __post_init__(self) -> None:
        s = np.array(self.s, dtype=float).ravel()
        if s.size < 1:
            raise ValidationError("a signature needs at least one entry")
        if np.any(~np.isfinite(s)) or np.any(s < 0):
            raise ValidationError("signature entries must be finite and nonnegative")
        total = math.fsum(s)
        if abs(total - 1.0) > SUM_TOL:
            raise ValidationError(f"signature sums to {total!r}, not 1")
        s.flags.writeable = False
        object.__setattr__(self, "s", s)

    @property
    def n(self) -> int:
        return int(self.s.size)

    def phi(self) -> np.ndarray:
        """``phi_j``, the fraction of working states with ``j`` working components, j = 0..n."""
        # phi_j = s_n + ... + s_{n-j+1}; summing nonnegative terms keeps it monotone
        phi = np.concatenate(([0.0], np.minimum(np.cumsum(self.s[::-1]), 1.0)))
        phi[-1] = 1.0
        return phi

    def fraction_law(self) -> "DiscreteFractionLaw":
        return DiscreteFractionLaw(self)

    def tolist(self) -> list[float]:
        return self.s.tolist()

    def __len__(self) -> int:
        return self.n


def _from_weights(weights: np.ndarray, label: str) -> Signature:
    total = math.fsum(weights)
    return Signature(weights / total, label=label)


def signature_from_structure(phi: StructureFunction) -> Signature:
    """Exhaustive signature of a coherent structure (2**n evaluations)."""
    if phi.n > MAX_EXACT_COMPONENTS:
        raise CapacityError(f"n <= {MAX_EXACT_COMPONENTS} required, got {phi.n}")
    phi.check_monotone()
    n = phi.n
    working = np.bincount(_popcount(n), weights=phi.table.astype(float), minlength=n + 1)
    frac = np.array([working[j] / math.comb(n, j) for j in range(n + 1)])
    if frac[0] != 0.0 or frac[n] != 1.0:
        raise ValidationError(
            f"structure {phi.name!r} must fail with all components down and work with all up"
        )
    # s_k = phi_{n-k+1} - phi_{n-k}
    s = frac[n:0:-1] - frac[n - 1 :: -1][:n]
    return Signature(s, label=phi.name)


def kofn_signature(n: int, k: int) -> Signature:
    if not (n >= 1 and 1 <= k <= n):
        raise DomainError(f"need 1 <= k <= n, got n={n}, k={k}")
    s = np.zeros(n)
    s[k - 1] = 1.0
    return Signature(s, label=f"{k}-out-of-{n}")


def _check_power(n: int, b: float) -> None:
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    if not b > 0:
        raise DomainError(f"b must be positive, got {b}")


def powerlaw_signature(n: int, b: float) -> Signature:
    """``s_k = C (n - k + 1)**(b - 1)``, normalised to sum to one."""
    _check_power(n, b)
    w = np.arange(n, 0, -1, dtype=float) ** (b - 1.0)
    return _from_weights(w, f"powerlaw(b={b:g})")


def reversed_powerlaw_signature(n: int, b: float) -> Signature:
    """``s_k = C k**(b - 1)``."""
    _check_power(n, b)
    w = np.arange(1, n + 1, dtype=float) ** (b - 1.0)
    return _from_weights(w, f"reversed_powerlaw(b={b:g})")


def binomial_signature(n: int, p: float) -> Signature:
    """Binomial(n - 1, p) weights shifted onto ``1..n``."""
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    if not 0 < p < 1:
        raise DomainError(f"p must lie in (0, 1), got {p}")
    w = stats.binom.pmf(np.arange(n), n - 1, p)
    return _from_weights(w, f"binomial(p={p:g})")


def normalization_asymptotics(n: int, b: float) -> float:
    """``C(n) n**b / b`` with ``C(n) = 1 / sum_{i<=n} i**(b-1)``; tends to 1."""
    if n < 2:
        raise DomainError(f"n must be at least 2, got {n}")
    if not b > 0:
        raise DomainError(f"b must be positive, got {b}")
    if b == 1:
        return 1.0
    total = math.fsum(np.arange(1, n + 1, dtype=float) ** (b - 1.0))
    return math.exp(b * math.log(n) - math.log(total) - math.log(b))


def sandwich_bounds(n: int, b: float) -> tuple[float, float]:
    """The sandwich ``(1/(1-1/n))**b`` / ``1/(1-n**-b)`` as (lower, upper).

    The two expressions swap roles between ``b < 1`` and ``b > 1``; the pair is
    returned ordered.
    """
    a = (1.0 / (1.0 - 1.0 / n)) ** b
    c = 1.0 / (1.0 - n ** (-b))
    return (min(a, c), max(a, c))


def integral_bounds(n: int, b: float) -> tuple[float, float]:
    """Bounds on ``C(n) n**b / b`` from comparing the sum with integrals of x**(b-1).

    For ``b > 1``: n**b/b <= sum <= ((n+1)**b - 1)/b; for ``b < 1`` the
    inequalities reverse.
    """
    ratio = n**b / ((n + 1.0) ** b - 1.0)
    return (min(ratio, 1.0), max(ratio, 1.0))


def hypothesis_b_statistic(sig: Signature) -> float:
    """``n**-0.5 * E[1 / sqrt(Q_n (1 - Q_n))]`` with ``Q_n = k/(n+1)`` w.p. ``s_k``."""
    n = sig.n
    q = np.arange(1, n + 1) / (n + 1.0)
    return math.fsum(sig.s / np.sqrt(q * (1.0 - q))) / math.sqrt(n)


def domination_envelope(b: float, q, k_b: float):
    """Envelope dominating ``n s_{ceil(nq)}`` for the power-law family."""
    q = np.asarray(q, dtype=float)
    if b < 1:
        return k_b * (1.0 - q) ** (b - 1.0)
    if b == 1:
        return np.ones_like(q)
    return k_b * b * (2.0 - q) ** (b - 1.0)


# --------------------------------------------------------------------------
# failure-fraction laws


class FailureFractionLaw:
    """Law of the failed fraction ``Q`` at which the system dies."""

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        raise NotImplementedError

    def sample_barrier(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draws of ``-log(1 - Q)``; draws with ``Q`` rounding to 1 are redrawn."""
        q = self.sample(rng, size)
        bad = q >= 1.0
        while bad.any():
            q[bad] = self.sample(rng, int(bad.sum()))
            bad = q >= 1.0
        return -np.log1p(-q)

    def density(self, q):
        return None

    def label(self) -> str:
        return type(self).__name__


@dataclass(frozen=True)
class DiscreteFractionLaw(FailureFractionLaw):
    signature: Signature

    @property
    def support(self) -> np.ndarray:
        n = self.signature.n
        return np.arange(1, n + 1) / (n + 1.0)

    @property
    def weights(self) -> np.ndarray:
        return self.signature.s

    def sample(self, rng, size):
        return sample_failure_index(self.signature, rng, size) / (self.signature.n + 1.0)


@dataclass(frozen=True)
class BetaLaw(FailureFractionLaw):
    """beta(1, b), density ``b (1 - q)**(b - 1)``."""

    b: float

    def __post_init__(self) -> None:
        if not self.b > 0:
            raise DomainError(f"b must be positive, got {self.b}")

    def sample(self, rng, size):
        return rng.beta(1.0, self.b, size)

    def sample_barrier(self, rng, size):
        # -log(1 - Q) is Exp(b) exactly; avoids cancellation in 1 - Q
        return rng.standard_exponential(size) / self.b

    def density(self, q):
        q = np.asarray(q, dtype=float)
        return self.b * (1.0 - q) ** (self.b - 1.0)

    def label(self) -> str:
        return f"beta(1,{self.b:g})"


@dataclass(frozen=True)
class PointMass(FailureFractionLaw):
    p: float

    def __post_init__(self) -> None:
        if not 0 < self.p < 1:
            raise DomainError(f"point mass must lie in (0, 1), got {self.p}")

    def sample(self, rng, size):
        return np.full(size, self.p)

    def label(self) -> str:
        return f"point({self.p:g})"


@dataclass(frozen=True, eq=False)
class TabulatedDensity(FailureFractionLaw):
    """Piecewise-constant density on a grid of ``(0, 1)``.

    Cell masses come from the trapezoid rule on the tabulated values, so the
    law is exactly normalised and sampled by inverting its piecewise-linear CDF.
    """

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.ndim != 1 or grid.shape != values.shape or grid.size < 2:
            raise ValidationError("density table needs matching 1-d q and density columns (>= 2 rows)")
        if grid[0] < 0 or grid[-1] > 1 or np.any(np.diff(grid) <= 0):
            raise ValidationError("density grid must be strictly increasing inside [0, 1]")
        if np.any(values < 0):
            raise ValidationError("density values must be nonnegative")
        mass = 0.5 * (values[1:] + values[:-1]) * np.diff(grid)
        if mass.sum() <= 0:
            raise ValidationError("density has zero mass")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "_cdf", np.concatenate(([0.0], np.cumsum(mass) / mass.sum())))

    @classmethod
    def read(cls, path: str | Path) -> "TabulatedDensity":
        rows = []
        for line in Path(path).read_text().splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.replace(",", " ").split()
            try:
                rows.append((float(parts[0]), float(parts[1])))
            except (ValueError, IndexError):
                if rows:
                    raise ValidationError(f"{path}: bad density row {line!r}") from None
        if not rows:
            raise ValidationError(f"{path}: no density rows")
        q, f = zip(*rows)
        return cls(np.array(q), np.array(f))

    def density(self, q):
        q = np.asarray(q, dtype=float)
        cell = np.clip(np.searchsorted(self.grid, q, side="right") - 1, 0, self.grid.size - 2)
        widths = np.diff(self.grid)
        dens = np.diff(self._cdf) / widths
        inside = (q >= self.grid[0]) & (q <= self.grid[-1])
        return np.where(inside, dens[cell], 0.0)

    def total_mass(self) -> float:
        return sum(
            integrate.quad(lambda x: float(self.density(x)), a, c, epsabs=1e-13)[0]
            for a, c in zip(self.grid[:-1], self.grid[1:])
        )

    def sample(self, rng, size):
        return np.interp(rng.random(size), self._cdf, self.grid)

    def label(self) -> str:
        return "tabulated"


# --------------------------------------------------------------------------
# families indexed by n


@dataclass(frozen=True, eq=False)
class SignatureFamily:
    """A signature sequence ``n -> s(n)`` with its known limit, if any."""

    name: str
    param: float

    _BUILDERS = {
        "powerlaw": powerlaw_signature,
        "reversed_powerlaw": reversed_powerlaw_signature,
        "binomial": binomial_signature,
        "kofn": lambda n, k: kofn_signature(n, int(k)),
    }

    def __post_init__(self) -> None:
        if self.name not in self._BUILDERS:
            raise DomainError(f"unknown signature family {self.name!r}")

    def __call__(self, n: int) -> Signature:
        return self._BUILDERS[self.name](n, self.param)

    def limit_density(self, q):
        q = np.asarray(q, dtype=float)
        b = self.param
        if self.name == "powerlaw":
            return b * (1.0 - q) ** (b - 1.0)
        if self.name == "reversed_powerlaw":
            return b * q ** (b - 1.0)
        return None

    def limit_law(self) -> FailureFractionLaw | None:
        if self.name == "powerlaw":
            return BetaLaw(self.param)
        if self.name == "binomial":
            return PointMass(self.param)
        return None

    @property
    def known_hypotheses(self) -> str:
        """How the family fares against the convergence hypotheses."""
        return {
            "powerlaw": "satisfies_CD",
            "reversed_powerlaw": "satisfies_CD",
            "binomial": "satisfies_AB_fails_CD",
            "kofn": "fails_B",
        }[self.name]


@dataclass(frozen=True)
class CDRow:
    q: float
    scaled: tuple[float, ...]
    density: float | None
    max_scaled: float
    passed: bool | None


@dataclass(frozen=True)
class CDReport:
    n_grid: tuple[int, ...]
    rows: tuple[CDRow, ...]
    tol: float

    @property
    def passed(self) -> bool | None:
        flags = [r.passed for r in self.rows]
        if any(f is None for f in flags):
            return None
        return all(flags)


def scaled_weight(sig: Signature, q: float) -> float:
    """``n * s_{ceil(n q)}``."""
    n = sig.n
    k = min(max(math.ceil(n * q), 1), n)
    return n * float(sig.s[k - 1])


def hypothesis_cd_check(
    family: Callable[[int], Signature],
    q_grid: Iterable[float],
    n_grid: Iterable[int],
    density: Callable | None = None,
    tol: float = 1e-2,
) -> CDReport:
    """Tabulate ``n s_{ceil(nq)}`` against a limiting density over a grid.

    ``density`` defaults to ``family.limit_density`` when the family has one.
    A row passes when the value at the largest ``n`` is within ``tol`` of the
    density.
    """
    n_grid = tuple(sorted(int(n) for n in n_grid))
    if density is None and isinstance(family, SignatureFamily):
        density = family.limit_density
    sigs = [family(n) for n in n_grid]
    rows = []
    for q in q_grid:
        if not 0 < q < 1:
            raise DomainError(f"q must lie in (0, 1), got {q}")
        scaled = tuple(scaled_weight(sig, q) for sig in sigs)
        f = None if density is None else density(q)
        f = None if f is None else float(f)
        passed = None if f is None else abs(scaled[-1] - f) <= tol
        rows.append(CDRow(float(q), scaled, f, max(scaled), passed))
    return CDReport(n_grid, tuple(rows), tol)


def sample_failure_index(sig: Signature, rng: np.random.Generator, size: int | None = None):
    """Draw ranks ``k`` with probability ``s_k`` by inverting the cumulative weights."""
    cdf = np.cumsum(sig.s)
    u = rng.random(size) * cdf[-1]
    k = np.searchsorted(cdf, u, side="right") + 1
    k = np.minimum(k, sig.n)
    return int(k) if size is None else k
