"""The five experiment runners behind the CLI.

Every random draw comes from a stream derived from
``(master seed, experiment kind, cell index, replication index)``, so results
never depend on the number of workers or on completion order.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from .. import __version__
from ..errors import CapacityError
from ..reliability import (
    LimitModel,
    SystemModel,
    limit_reliability,
    limit_reliability_reversed,
    mttf_exact,
    sample_system_failure,
)
from ..signature import SignatureFamily, hypothesis_b_statistic, scaled_weight
from ..stats import ks_two_sample, mean_and_se, relative_error
from ..subordinator import SubordinatorSpec
from .config import DESK_SCALE, FULL_SCALE, ExperimentConfig, check_for_kind, signature_cells
from .table import ResultTable

KIND_IDS = {
    "pvalue-study": 1,
    "mean-study": 2,
    "reliability-curve": 3,
    "hypothesis-report": 4,
    "mttf-table": 5,
}

SUB_COLUMNS = ["mu", "lambda", "jump_law", "jump_param", "jump_scale"]

COLUMNS = {
    "pvalue-study": ["kind", *SUB_COLUMNS, "b", "n", "reps", "samples_per_test", "limit_samples",
                     "mean_p", "se_p", "seed"],
    "mean-study": ["kind", *SUB_COLUMNS, "b", "n", "samples", "mean", "se_mean", "limit_mean",
                   "rel_error", "se_rel", "seed"],
    "reliability-curve": ["kind", *SUB_COLUMNS, "family", "param", "n", "limit_law", "t", "samples",
                          "reliability", "se_reliability", "limit_mc", "se_limit", "limit_closed", "gap", "seed"],
    "hypothesis-report": ["kind", "family", "param", "n", "q", "b_statistic", "scaled_weight", "density",
                          "classification"],
    "mttf-table": ["kind", *SUB_COLUMNS, "family", "param", "n", "samples", "mttf_exact", "mc_mean", "mc_se",
                   "z", "seed"],
}


def stream(seed: int, kind: str, cell: int, rep: int = 0) -> np.random.Generator:
    """Counter-based split of the master seed."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(KIND_IDS[kind], cell, rep)))


def sub_columns(spec: SubordinatorSpec) -> dict[str, Any]:
    law = spec.jump_law
    return {
        "mu": spec.mu,
        "lambda": spec.jump_rate,
        "jump_law": law.name,
        "jump_param": law.param,
        "jump_scale": getattr(law, "scale", None),
    }


def _pool_map(fn: Callable, tasks: Sequence, workers: int) -> list:
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=1))


def _sizes(cfg: ExperimentConfig) -> dict[str, int]:
    if cfg.full_scale:
        return dict(FULL_SCALE)
    out = dict(DESK_SCALE)
    if cfg.samples is not None:
        for key in ("samples", "mean_samples", "mttf_samples", "curve_samples"):
            out[key] = cfg.samples
    if cfg.repetitions is not None:
        out["repetitions"] = cfg.repetitions
    return out


def _new_table(kind: str, cfg: ExperimentConfig) -> ResultTable:
    return ResultTable(
        kind,
        COLUMNS[kind],
        metadata={"config_sha256": cfg.digest(), "seed": str(cfg.seed), "version": __version__},
    )


# ---------------------------------------------------------------- p-values


def _pvalue_cell(task) -> tuple[float, float]:
    seed, cell, spec, b, n, samples, limit_samples, reps = task
    model = SystemModel(SignatureFamily("powerlaw", b)(n), spec)
    rate = spec.psi(b)
    pvals = np.empty(reps)
    for r in range(reps):
        rng = stream(seed, "pvalue-study", cell, r)
        sys_times = sample_system_failure(model, rng, samples)
        limit_times = rng.exponential(1.0 / rate, limit_samples)
        pvals[r] = ks_two_sample(sys_times, limit_times).p_value
    if reps < 2:
        return float(pvals[0]), math.nan
    return mean_and_se(pvals)


def run_pvalue_study(cfg: ExperimentConfig, workers: int | None = None, base: Path | None = None) -> ResultTable:
    """Average KS p-value of system failure times against the exponential limit."""
    kind = "pvalue-study"
    check_for_kind(cfg, kind)
    sizes = _sizes(cfg)
    samples = sizes["samples"]
    limit_samples = samples if cfg.full_scale or cfg.limit_samples is None else cfg.limit_samples
    reps = sizes["repetitions"]
    cells = [
        (spec, fam.param, n)
        for spec in cfg.subordinators()
        for fam in cfg.families()
        for n in cfg.n
    ]
    tasks = [(cfg.seed, i, spec, b, n, samples, limit_samples, reps) for i, (spec, b, n) in enumerate(cells)]
    results = _pool_map(_pvalue_cell, tasks, workers or cfg.workers)
    table = _new_table(kind, cfg)
    for (spec, b, n), (mean_p, se_p) in zip(cells, results):
        table.add({
            "kind": kind, **sub_columns(spec), "b": b, "n": n, "reps": reps,
            "samples_per_test": samples, "limit_samples": limit_samples,
            "mean_p": mean_p, "se_p": se_p, "seed": cfg.seed,
        })
    return table


# ---------------------------------------------------------------- means


def _mean_cell(task) -> tuple[float, float]:
    seed, cell, spec, b, n, samples = task
    model = SystemModel(SignatureFamily("powerlaw", b)(n), spec)
    times = sample_system_failure(model, stream(seed, "mean-study", cell), samples)
    return mean_and_se(times)


def run_mean_study(cfg: ExperimentConfig, workers: int | None = None, base: Path | None = None) -> ResultTable:
    """Relative error of the sample mean failure time against ``1/psi(b)``."""
    kind = "mean-study"
    check_for_kind(cfg, kind)
    samples = _sizes(cfg)["mean_samples"]
    cells = [(spec, fam.param, n) for spec in cfg.subordinators() for fam in cfg.families() for n in cfg.n]
    tasks = [(cfg.seed, i, spec, b, n, samples) for i, (spec, b, n) in enumerate(cells)]
    results = _pool_map(_mean_cell, tasks, workers or cfg.workers)
    table = _new_table(kind, cfg)
    for (spec, b, n), (mean, se) in zip(cells, results):
        rate = spec.psi(b)
        table.add({
            "kind": kind, **sub_columns(spec), "b": b, "n": n, "samples": samples,
            "mean": mean, "se_mean": se, "limit_mean": 1.0 / rate,
            "rel_error": relative_error(mean, 1.0 / rate), "se_rel": se * rate, "seed": cfg.seed,
        })
    return table


# ---------------------------------------------------------------- reliability curves


def _curve_cell(task) -> list[dict[str, Any]]:
    seed, cell, spec, sig, law, reversed_b, t_grid, samples = task
    kind = "reliability-curve"
    times = sample_system_failure(SystemModel(sig, spec), stream(seed, kind, cell, 0), samples)
    rows = []
    for ti, t in enumerate(t_grid):
        rel = float(np.mean(times > t))
        se = math.sqrt(rel * (1.0 - rel) / samples)
        limit_mc = se_limit = closed = None
        rng = stream(seed, kind, cell, 1 + ti)
        if law is not None:
            est = limit_reliability(LimitModel(law, spec), t, samples, rng)
            limit_mc, se_limit, closed = est.estimate, est.se, est.closed_form
        elif reversed_b is not None:
            est = limit_reliability_reversed(reversed_b, spec, t, samples, rng)
            limit_mc, se_limit, closed = est.estimate, est.se, est.closed_form
        ref = closed if closed is not None else limit_mc
        gap = None if ref is None else abs(rel - ref)
        rows.append({"t": t, "reliability": rel, "se_reliability": se, "limit_mc": limit_mc,
                     "se_limit": se_limit, "limit_closed": closed, "gap": gap})
    return rows


def run_reliability_curve(cfg: ExperimentConfig, workers: int | None = None, base: Path | None = None) -> ResultTable:
    """Finite-system reliability against its large-system limit over a time grid."""
    kind = "reliability-curve"
    check_for_kind(cfg, kind)
    samples = _sizes(cfg)["curve_samples"]
    cells = []
    for spec in cfg.subordinators():
        for fam_name, param, sig, fam in signature_cells(cfg, base):
            law = cfg.limit_law(fam, base)
            reversed_b = param if law is None and fam_name == "reversed_powerlaw" else None
            cells.append((spec, fam_name, param, sig, law, reversed_b))
    tasks = [(cfg.seed, i, spec, sig, law, rb, list(cfg.t), samples)
             for i, (spec, _, _, sig, law, rb) in enumerate(cells)]
    results = _pool_map(_curve_cell, tasks, workers or cfg.workers)
    table = _new_table(kind, cfg)
    for (spec, fam_name, param, sig, law, rb), rows in zip(cells, results):
        if law is not None:
            law_label = law.label()
        elif rb is not None:
            law_label = f"reversed_powerlaw({rb:g})"
        else:
            law_label = None
        for row in rows:
            table.add({"kind": kind, **sub_columns(spec), "family": fam_name, "param": param, "n": sig.n,
                       "limit_law": law_label, "samples": samples, "seed": cfg.seed, **row})
    return table


# ---------------------------------------------------------------- hypothesis diagnostics


def run_hypothesis_report(cfg: ExperimentConfig, workers: int | None = None, base: Path | None = None) -> ResultTable:
    """Tabulate the signature diagnostics; deterministic, no sampling."""
    kind = "hypothesis-report"
    check_for_kind(cfg, kind)
    table = _new_table(kind, cfg)
    for fam in cfg.families():
        for n in cfg.n:
            sig = fam(n)
            bstat = hypothesis_b_statistic(sig)
            for q in cfg.q:
                dens = fam.limit_density(q)
                table.add({
                    "kind": kind, "family": fam.name, "param": fam.param, "n": n, "q": q,
                    "b_statistic": bstat, "scaled_weight": scaled_weight(sig, q),
                    "density": None if dens is None else float(dens),
                    "classification": fam.known_hypotheses,
                })
    return table


# ---------------------------------------------------------------- MTTF


def _mttf_cell(task) -> tuple[float | None, float, float]:
    seed, cell, spec, sig, samples = task
    model = SystemModel(sig, spec)
    try:
        exact = mttf_exact(model)
    except CapacityError:
        exact = None
    mean, se = mean_and_se(sample_system_failure(model, stream(seed, "mttf-table", cell), samples))
    return exact, mean, se


def run_mttf_table(cfg: ExperimentConfig, workers: int | None = None, base: Path | None = None) -> ResultTable:
    """Exact MTTF next to a Monte Carlo mean; rows beyond the exact cap are MC only."""
    kind = "mttf-table"
    check_for_kind(cfg, kind)
    samples = _sizes(cfg)["mttf_samples"]
    cells = [(spec, fam_name, param, sig) for spec in cfg.subordinators()
             for fam_name, param, sig, _ in signature_cells(cfg, base)]
    tasks = [(cfg.seed, i, spec, sig, samples) for i, (spec, _, _, sig) in enumerate(cells)]
    results = _pool_map(_mttf_cell, tasks, workers or cfg.workers)
    table = _new_table(kind, cfg)
    for (spec, fam_name, param, sig), (exact, mean, se) in zip(cells, results):
        z = None if exact is None or se == 0 else (mean - exact) / se
        table.add({"kind": kind, **sub_columns(spec), "family": fam_name, "param": param, "n": sig.n,
                   "samples": samples, "mttf_exact": exact, "mc_mean": mean, "mc_se": se, "z": z,
                   "seed": cfg.seed})
    return table


RUNNERS = {
    "pvalue-study": run_pvalue_study,
    "mean-study": run_mean_study,
    "reliability-curve": run_reliability_curve,
    "hypothesis-report": run_hypothesis_report,
    "mttf-table": run_mttf_table,
}


def run_experiment(kind: str, cfg: ExperimentConfig, workers: int | None = None, base: Path | None = None) -> ResultTable:
    return RUNNERS[kind](cfg, workers=workers, base=base)
