import numpy as np

from lfmo_reliability import Exponential, Pareto, SubordinatorSpec, Uniform01

PURE_DRIFT = SubordinatorSpec(1.0, 0.0)
EXP_JUMPS = SubordinatorSpec(0.0, 1.0, Exponential(1.0))
MIXED_UNIFORM = SubordinatorSpec(0.5, 1.0, Uniform01())
PARETO3 = SubordinatorSpec(0.5, 2.0, Pareto(3.0))


def within_se(estimate, target, se, k):
    return abs(estimate - target) <= k * se
