"""Reliability of large mixed coherent systems with Levy-frailty Marshall-Olkin lifetimes."""

from .errors import CapacityError, DegenerateModelError, DomainError, LfmoError, ValidationError
from .lfmo import (
    TriggerSet,
    kth_trigger,
    sample_failure_times,
    sample_kth_failure,
    sample_kth_failures,
    sample_triggers,
)
from .reliability import (
    Estimate,
    LimitModel,
    SystemModel,
    limit_passage_sample,
    limit_reliability,
    limit_reliability_reversed,
    mttf_exact,
    reliability_mc,
    sample_system_failure,
)
from .signature import (
    BetaLaw,
    PointMass,
    Signature,
    SignatureFamily,
    StructureFunction,
    TabulatedDensity,
    binomial_signature,
    hypothesis_b_statistic,
    hypothesis_cd_check,
    kofn_signature,
    normalization_asymptotics,
    powerlaw_signature,
    reversed_powerlaw_signature,
    sample_failure_index,
    signature_from_structure,
)
from .stats import KsResult, ks_two_sample, mean_and_se, relative_error
from .subordinator import (
    Exponential,
    JumpLaw,
    Pareto,
    SubordinatorPath,
    SubordinatorSpec,
    Uniform01,
    first_passage,
    first_passage_times,
    laplace_exponent,
    sample_path,
    sample_value,
    value_at,
)

__version__ = "0.1.0"
