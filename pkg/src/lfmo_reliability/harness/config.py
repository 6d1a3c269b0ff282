"""Experiment configuration files (YAML, schema ``lfmo-experiment/1``)."""

from __future__ import annotations

import hashlib
import json
from itertools import product
from pathlib import Path
from typing import Any, Literal, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError as PydanticError, model_validator

from ..errors import LfmoError
from ..signature import (
    BetaLaw,
    FailureFractionLaw,
    PointMass,
    Signature,
    SignatureFamily,
    StructureFunction,
    TabulatedDensity,
    signature_from_structure,
)
from ..subordinator import SubordinatorSpec, jump_law_from_dict

SCHEMA_ID = "lfmo-experiment/1"

Kind = Literal["pvalue-study", "mean-study", "reliability-curve", "hypothesis-report", "mttf-table"]
KINDS: tuple[str, ...] = Kind.__args__

DESK_SCALE = {"samples": 500, "repetitions": 50, "mean_samples": 20_000, "mttf_samples": 100_000, "curve_samples": 20_000}
FULL_SCALE = {"samples": 1000, "repetitions": 1000, "mean_samples": 100_000, "mttf_samples": 100_000, "curve_samples": 100_000}


class ConfigError(LfmoError, ValueError):
    """Invalid experiment configuration; the message carries the field path."""


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class JumpConfig(_Strict):
    law: Literal["uniform01", "exponential", "pareto"]
    rate: Optional[float] = None
    alpha: Optional[float] = None
    scale: Optional[float] = None

    @model_validator(mode="after")
    def _params(self) -> "JumpConfig":
        allowed = {"uniform01": set(), "exponential": {"rate"}, "pareto": {"alpha", "scale"}}[self.law]
        given = {k for k in ("rate", "alpha", "scale") if getattr(self, k) is not None}
        extra = given - allowed
        if extra:
            raise ValueError(f"parameter(s) {sorted(extra)} not valid for jump law {self.law!r}")
        if self.law == "pareto" and self.alpha is None:
            raise ValueError("pareto jumps need alpha")
        return self

    def build(self):
        params = {k: getattr(self, k) for k in ("rate", "alpha", "scale") if getattr(self, k) is not None}
        return jump_law_from_dict({"law": self.law, **params})


class SubordinatorGrid(_Strict):
    mu: list[float] = Field(min_length=1)
    lambda_: list[float] = Field(alias="lambda", min_length=1)
    jumps: list[JumpConfig] = Field(min_length=1)


class StructureConfig(_Strict):
    builtin: Optional[Literal["series", "parallel", "k-out-of-n", "bridge-5"]] = None
    file: Optional[str] = None
    n: Optional[int] = None
    k: Optional[int] = None

    @model_validator(mode="after")
    def _one_source(self) -> "StructureConfig":
        if (self.builtin is None) == (self.file is None):
            raise ValueError("give exactly one of 'builtin' or 'file'")
        return self


class SignatureConfig(_Strict):
    family: Literal["powerlaw", "reversed_powerlaw", "binomial", "kofn", "structure"]
    params: list[float] = Field(default_factory=list)
    structure: Optional[StructureConfig] = None

    @model_validator(mode="after")
    def _consistent(self) -> "SignatureConfig":
        if self.family == "structure":
            if self.structure is None:
                raise ValueError("family 'structure' needs a 'structure' block")
            if self.params:
                raise ValueError("family 'structure' takes no params")
        else:
            if self.structure is not None:
                raise ValueError("'structure' block is only valid with family 'structure'")
            if not self.params:
                raise ValueError(f"family {self.family!r} needs a nonempty params list")
        return self


class LimitConfig(_Strict):
    law: Literal["beta", "point", "density"]
    b: Optional[float] = None
    p: Optional[float] = None
    file: Optional[str] = None


class ExperimentConfig(_Strict):
    schema_: str = Field(alias="schema")
    kind: Optional[Kind] = None
    seed: int = Field(ge=0, lt=2**64)
    workers: int = Field(default=1, ge=1)
    subordinator: Optional[SubordinatorGrid] = None
    signature: SignatureConfig
    n: list[int] = Field(default_factory=list)
    samples: Optional[int] = Field(default=None, ge=2)
    repetitions: Optional[int] = Field(default=None, ge=1)
    limit_samples: Optional[int] = Field(default=None, ge=2)
    t: list[float] = Field(default_factory=list)
    q: list[float] = Field(default_factory=list)
    limit: Optional[LimitConfig] = None
    full_scale: bool = False
    output: Optional[str] = None

    @model_validator(mode="after")
    def _schema(self) -> "ExperimentConfig":
        if self.schema_ != SCHEMA_ID:
            raise ValueError(f"unsupported schema {self.schema_!r}; expected {SCHEMA_ID!r}")
        if any(n < 1 for n in self.n):
            raise ValueError("n values must be positive")
        return self

    # ------------------------------------------------------------------ views

    def subordinators(self) -> list[SubordinatorSpec]:
        grid = self.subordinator
        out = []
        for i, (mu, lam, jump) in enumerate(product(grid.mu, grid.lambda_, grid.jumps)):
            try:
                out.append(SubordinatorSpec(mu=mu, jump_rate=lam, jump_law=jump.build()))
            except LfmoError as exc:
                raise ConfigError(f"subordinator (mu={mu}, lambda={lam}, jump={jump.law}): {exc}") from None
        return out

    def families(self) -> list[SignatureFamily]:
        try:
            return [SignatureFamily(self.signature.family, p) for p in self.signature.params]
        except LfmoError as exc:
            raise ConfigError(f"signature: {exc}") from None

    def structure(self, base: Path | None = None) -> StructureFunction:
        sc = self.signature.structure
        try:
            if sc.file is not None:
                path = Path(sc.file)
                if base is not None and not path.is_absolute():
                    path = base / path
                return StructureFunction.read(path)
            return StructureFunction.builtin(sc.builtin, n=sc.n, k=sc.k)
        except (LfmoError, OSError) as exc:
            raise ConfigError(f"signature.structure: {exc}") from None

    def limit_law(self, family: SignatureFamily | None, base: Path | None = None) -> FailureFractionLaw | None:
        lc = self.limit
        if lc is None:
            return None if family is None else family.limit_law()
        try:
            if lc.law == "beta":
                return BetaLaw(lc.b)
            if lc.law == "point":
                return PointMass(lc.p)
            path = Path(lc.file)
            if base is not None and not path.is_absolute():
                path = base / path
            return TabulatedDensity.read(path)
        except (LfmoError, OSError, TypeError) as exc:
            raise ConfigError(f"limit: {exc}") from None

    def canonical(self) -> dict[str, Any]:
        """Config content that determines results (excludes workers and output)."""
        data = self.model_dump(mode="json", by_alias=True, exclude={"workers", "output"})
        return data

    def digest(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _format_pydantic(exc: PydanticError) -> str:
    lines = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"]) or "<root>"
        lines.append(f"{loc}: {err['msg']}")
    return "; ".join(lines)


def parse_config(data: Any) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("<root>: config must be a mapping")
    try:
        return ExperimentConfig.model_validate(data)
    except PydanticError as exc:
        raise ConfigError(_format_pydantic(exc)) from None


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        data = yaml.safe_load(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML: {exc}") from None
    return parse_config(data)


def check_for_kind(cfg: ExperimentConfig, kind: str) -> None:
    """Kind-specific requirements that the schema alone cannot express."""
    if cfg.kind is not None and cfg.kind != kind:
        raise ConfigError(f"kind: config declares {cfg.kind!r} but {kind!r} was requested")
    needs_sub = kind != "hypothesis-report"
    if needs_sub and cfg.subordinator is None:
        raise ConfigError("subordinator: required for this experiment")
    if needs_sub:
        cfg.subordinators()
    fam = cfg.signature.family
    if kind in ("pvalue-study", "mean-study") and fam != "powerlaw":
        raise ConfigError(f"signature.family: {kind} needs the 'powerlaw' family, got {fam!r}")
    if kind == "hypothesis-report" and fam == "structure":
        raise ConfigError("signature.family: hypothesis-report needs a signature family, not a structure")
    if fam != "structure" and not cfg.n:
        raise ConfigError("n: nonempty list of component counts required")
    if kind == "pvalue-study":
        if cfg.samples is not None and cfg.samples < 30:
            raise ConfigError("samples: KS experiments need at least 30 samples per test")
        if cfg.limit_samples is not None and cfg.limit_samples < 30:
            raise ConfigError("limit_samples: KS experiments need at least 30 samples per test")
    if kind == "reliability-curve" and not cfg.t:
        raise ConfigError("t: nonempty time grid required")
    if any(t < 0 for t in cfg.t):
        raise ConfigError("t: times must be nonnegative")
    if kind == "hypothesis-report" and not cfg.q:
        raise ConfigError("q: nonempty grid of fractions in (0, 1) required")
    if any(not 0 < q < 1 for q in cfg.q):
        raise ConfigError("q: fractions must lie in (0, 1)")
    cfg.families() if fam != "structure" else None


def signature_cells(cfg: ExperimentConfig, base: Path | None = None) -> list[tuple[str, float | None, Signature, SignatureFamily | None]]:
    """Expand (family, param, n) into concrete signatures: (family, param, signature, family)."""
    if cfg.signature.family == "structure":
        sf = cfg.structure(base)
        try:
            sig = signature_from_structure(sf)
        except LfmoError as exc:
            raise ConfigError(f"signature.structure: {exc}") from None
        return [(f"structure:{sf.name}", None, sig, None)]
    out = []
    for fam in cfg.families():
        for n in cfg.n:
            try:
                out.append((fam.name, fam.param, fam(n), fam))
            except LfmoError as exc:
                raise ConfigError(f"signature (family={fam.name}, param={fam.param}, n={n}): {exc}") from None
    return out
