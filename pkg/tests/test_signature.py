import itertools
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from lfmo_reliability import (
    BetaLaw,
    CapacityError,
    DomainError,
    PointMass,
    Signature,
    SignatureFamily,
    StructureFunction,
    TabulatedDensity,
    ValidationError,
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
from lfmo_reliability.signature import domination_envelope, integral_bounds, sandwich_bounds, scaled_weight

# ---------------------------------------------------------------- oracles

BRIDGE_EDGES = [("s", "a"), ("s", "b"), ("a", "b"), ("a", "t"), ("b", "t")]


def _bridge_connected(up):
    """Graph search from s to t over the working edges."""
    adj = {}
    for ok, (u, v) in zip(up, BRIDGE_EDGES):
        if ok:
            adj.setdefault(u, set()).add(v)
            adj.setdefault(v, set()).add(u)
    seen, todo = {"s"}, ["s"]
    while todo:
        for w in adj.get(todo.pop(), ()):
            if w not in seen:
                seen.add(w)
                todo.append(w)
    return "t" in seen


def _signature_by_permutations(works, n):
    """Fraction of failure orders under which the k-th failure kills the system."""
    counts = np.zeros(n)
    for order in itertools.permutations(range(n)):
        up = [True] * n
        for k, comp in enumerate(order, start=1):
            up[comp] = False
            if not works(up):
                counts[k - 1] += 1
                break
    return counts / math.factorial(n)


def _power_sum(n, b):
    mpmath.mp.dps = 40
    return mpmath.zeta(1 - b) - mpmath.zeta(1 - b, n + 1)


# ---------------------------------------------------------------- structures


def test_bridge_against_permutation_oracle():
    oracle = _signature_by_permutations(_bridge_connected, 5)
    assert np.allclose(oracle, [0, 0.2, 0.6, 0.2, 0], atol=1e-15)
    sig = signature_from_structure(StructureFunction.bridge5())
    assert np.max(np.abs(sig.s - oracle)) <= 1e-12


def test_bridge_truth_table_matches_graph():
    sf = StructureFunction.bridge5()
    for bits in itertools.product([0, 1], repeat=5):
        assert sf(bits) == _bridge_connected([bool(b) for b in bits])


def test_series_and_parallel_examples():
    assert signature_from_structure(StructureFunction.series(4)).tolist() == [1, 0, 0, 0]
    assert signature_from_structure(StructureFunction.parallel(4)).tolist() == [0, 0, 0, 1]


@pytest.mark.parametrize("n", range(1, 11))
def test_kofn_structure_matches_kofn_signature(n):
    for k in range(1, n + 1):
        sig = signature_from_structure(StructureFunction.k_out_of_n(n, k))
        assert np.array_equal(sig.s, kofn_signature(n, k).s)


def test_kofn_examples():
    assert kofn_signature(5, 1).tolist() == [1, 0, 0, 0, 0]
    assert kofn_signature(5, 5).tolist() == [0, 0, 0, 0, 1]
    assert kofn_signature(3, 2).tolist() == [0, 1, 0]
    two_of_three = _signature_by_permutations(lambda up: sum(up) >= 2, 3)
    assert np.array_equal(two_of_three, [0, 1, 0])


@pytest.mark.parametrize("name,n,k", [("series", 6, None), ("parallel", 6, None), ("k-out-of-n", 7, 3), ("bridge-5", None, None)])
def test_builtins_are_coherent(name, n, k):
    StructureFunction.builtin(name, n=n, k=k).check_coherent()


def test_broken_monotonicity_is_named():
    table = StructureFunction.series(3).table.copy()
    table[0b001] = True  # only component 1 up, yet working
    sf = StructureFunction(3, table)
    with pytest.raises(ValidationError, match=r"Phi\(100\) = 1 but Phi\(110\) = 0"):
        sf.check_monotone()
    with pytest.raises(ValidationError, match="not monotone"):
        signature_from_structure(sf)


def test_irrelevant_component_detected():
    sf = StructureFunction.from_function(3, lambda x: x[0] and x[1])
    assert sf.irrelevant_components() == [3]
    with pytest.raises(ValidationError):
        sf.check_coherent()


def test_capacity_cap():
    with pytest.raises(CapacityError):
        StructureFunction.series(26)


def test_truth_table_round_trip(tmp_path):
    sf = StructureFunction.bridge5()
    path = tmp_path / "bridge.tt"
    sf.write(path)
    back = StructureFunction.read(path)
    assert np.array_equal(back.table, sf.table)
    lines = path.read_text().splitlines()
    assert lines[0] == "5"
    assert lines[1 + 0b01001] == "10010 1"  # edges 1 and 4 form a path


def test_truth_table_rejects_missing_rows(tmp_path):
    path = tmp_path / "bad.tt"
    path.write_text("2\n00 0\n10 0\n11 1\n")
    with pytest.raises(ValidationError, match="missing"):
        StructureFunction.read(path)


# ---------------------------------------------------------------- families


def test_powerlaw_examples():
    assert powerlaw_signature(4, 1).tolist() == [0.25] * 4
    assert np.allclose(powerlaw_signature(2, 2).s, [2 / 3, 1 / 3], rtol=0, atol=1e-15)
    w = np.array([1 / math.sqrt(3), 1 / math.sqrt(2), 1.0])
    assert np.allclose(powerlaw_signature(3, 0.5).s, w / w.sum(), rtol=0, atol=1e-15)
    with pytest.raises(DomainError):
        powerlaw_signature(3, 0)


def test_reversed_powerlaw_examples():
    assert reversed_powerlaw_signature(4, 1).tolist() == [0.25] * 4
    assert np.allclose(reversed_powerlaw_signature(2, 2).s, [1 / 3, 2 / 3], rtol=0, atol=1e-15)


def test_binomial_examples():
    assert binomial_signature(1, 0.3).tolist() == [1.0]
    assert np.allclose(binomial_signature(3, 0.5).s, [0.25, 0.5, 0.25], rtol=0, atol=1e-15)
    assert np.allclose(binomial_signature(2, 0.3).s, [0.7, 0.3], rtol=0, atol=1e-15)
    with pytest.raises(DomainError):
        binomial_signature(3, 1.0)


builders = st.one_of(
    st.tuples(st.just(powerlaw_signature), st.integers(1, 3000), st.floats(0.05, 6.0)),
    st.tuples(st.just(reversed_powerlaw_signature), st.integers(1, 3000), st.floats(0.05, 6.0)),
    st.tuples(st.just(binomial_signature), st.integers(1, 3000), st.floats(0.01, 0.99)),
)


@settings(max_examples=80, deadline=None)
@given(builders)
def test_constructors_land_on_the_simplex(case):
    build, n, param = case
    sig = build(n, param)
    assert sig.n == n
    assert np.all(sig.s >= 0)
    assert abs(math.fsum(sig.s) - 1.0) <= 1e-12
    phi = sig.phi()
    assert phi[0] == 0.0 and phi[-1] == 1.0
    assert np.all(np.diff(phi) >= -1e-15)


def test_signature_validation():
    with pytest.raises(ValidationError):
        Signature([0.5, 0.6])
    with pytest.raises(ValidationError):
        Signature([1.5, -0.5])
    sig = Signature([0.5, 0.5])
    with pytest.raises(ValueError):
        sig.s[0] = 1.0


def test_large_n_powerlaw_stays_normalised():
    sig = powerlaw_signature(10**6, 0.3)
    assert abs(math.fsum(sig.s) - 1.0) <= 1e-12


# ---------------------------------------------------------------- normalisation


def test_normalization_b_one_is_exact():
    for n in (2, 17, 10**5):
        assert normalization_asymptotics(n, 1.0) == 1.0


@pytest.mark.parametrize("b", [0.3, 0.5, 1.5, 2.0, 3.0])
@pytest.mark.parametrize("n", [10, 1000, 10**5])
def test_normalization_against_zeta_oracle(b, n):
    oracle = float(mpmath.power(n, b) / (b * _power_sum(n, b)))
    assert normalization_asymptotics(n, b) == pytest.approx(oracle, rel=1e-12)


def test_normalization_b_two_is_n_over_n_plus_one():
    n = 10**4
    assert normalization_asymptotics(n, 2.0) == pytest.approx(n / (n + 1), rel=1e-14)


def test_normalization_b_half_large_n():
    assert abs(normalization_asymptotics(10**6, 0.5) - 1.0) < 2e-3


@pytest.mark.parametrize("b", [0.3, 0.5, 0.9, 1.2, 2.0, 4.0])
@pytest.mark.parametrize("n", [2, 10, 1000, 10**5])
def test_integral_bounds_hold(b, n):
    lo, hi = integral_bounds(n, b)
    assert lo - 1e-14 <= normalization_asymptotics(n, b) <= hi + 1e-14


def test_sandwich_bounds_ordered():
    lo, hi = sandwich_bounds(1000, 0.5)
    assert lo < hi
    assert lo < normalization_asymptotics(1000, 0.5) < hi


# ---------------------------------------------------------------- hypotheses


def test_b_statistic_examples():
    assert hypothesis_b_statistic(Signature([1.0])) == pytest.approx(2.0, rel=1e-15)
    assert hypothesis_b_statistic(kofn_signature(10**4, 1)) > 0.9
    assert hypothesis_b_statistic(powerlaw_signature(10**4, 1)) < hypothesis_b_statistic(powerlaw_signature(100, 1))


def test_b_statistic_direct_sum():
    sig = powerlaw_signature(50, 0.7)
    q = np.arange(1, 51) / 51
    oracle = sum(float(s) / math.sqrt(x * (1 - x)) for s, x in zip(sig.s, q)) / math.sqrt(50)
    assert hypothesis_b_statistic(sig) == pytest.approx(oracle, rel=1e-13)


def test_cd_check_exact_value_at_half():
    n, b, q = 10**5, 0.5, 0.5
    k = math.ceil(n * q)
    oracle = float(n * mpmath.power(n - k + 1, b - 1) / _power_sum(n, b))
    report = hypothesis_cd_check(SignatureFamily("powerlaw", b), [q], [n])
    assert report.rows[0].scaled[-1] == pytest.approx(oracle, rel=1e-12)
    # the limit density is 0.7071; convergence is slow, about n**-0.5
    assert report.rows[0].scaled[-1] == pytest.approx(0.70874, abs=1e-5)
    assert report.passed


def test_cd_check_binomial_diverges_off_p():
    fam = SignatureFamily("binomial", 0.5)
    report = hypothesis_cd_check(fam, [0.4], [10, 100, 1000, 10**4])
    vals = report.rows[0].scaled
    assert vals[-1] < 1e-10 < vals[0]
    assert report.passed is None  # no density to compare with


@pytest.mark.parametrize("b", [0.5, 1.5, 3.0])
def test_scaled_weights_converge_and_stay_dominated(b):
    fam = SignatureFamily("powerlaw", b)
    qs = np.linspace(0.05, 0.95, 19)
    report = hypothesis_cd_check(fam, qs, [100, 1000, 10**4, 10**5])
    for row in report.rows:
        errs = [abs(v - row.density) for v in row.scaled]
        assert errs[-1] < errs[0] or errs[-1] < 1e-4
    # the smallest constant that works over the sampled (n, q) grid is finite
    sigs = {n: fam(n) for n in (10, 100, 1000, 10**4)}
    ratios = [
        scaled_weight(s, q) / float(domination_envelope(b, q, 1.0)) for s in sigs.values() for q in qs
    ]
    k_b = max(ratios)
    assert k_b < 3.0
    for s in sigs.values():
        for q in qs:
            assert scaled_weight(s, q) <= float(domination_envelope(b, q, k_b)) + 1e-12


def test_known_hypotheses_labels():
    assert SignatureFamily("binomial", 0.5).known_hypotheses == "satisfies_AB_fails_CD"
    assert SignatureFamily("kofn", 1).known_hypotheses == "fails_B"


# ---------------------------------------------------------------- fraction laws


@pytest.mark.parametrize("b", [0.4, 1.0, 2.5])
def test_beta_density_integrates_to_one(b):
    total, _ = integrate.quad(lambda q: float(BetaLaw(b).density(q)), 0, 1, epsabs=1e-12, limit=200)
    assert abs(total - 1.0) < 1e-8


def test_beta_barrier_is_exponential(rng):
    from scipy import stats

    law = BetaLaw(0.3)
    via_barrier = law.sample_barrier(rng, 5000)
    q = law.sample(rng, 20_000)
    via_q = -np.log1p(-q[q < 1.0])
    assert stats.ks_2samp(via_barrier, via_q).pvalue > 0.01


def test_discrete_fraction_law_weights():
    sig = powerlaw_signature(4, 2.0)
    law = sig.fraction_law()
    assert np.array_equal(law.weights, sig.s)
    assert np.allclose(law.support, [0.2, 0.4, 0.6, 0.8])


def test_point_mass_domain():
    with pytest.raises(DomainError):
        PointMass(1.0)


def test_tabulated_density(tmp_path, rng):
    path = tmp_path / "f.csv"
    grid = np.linspace(0, 1, 201)
    path.write_text("q,density\n" + "\n".join(f"{q!r},{2 * q!r}" for q in grid.tolist()))
    law = TabulatedDensity.read(path)
    assert abs(law.total_mass() - 1.0) < 1e-8
    draws = law.sample(rng, 100_000)
    # density 2q has mean 2/3
    assert abs(draws.mean() - 2 / 3) < 4 * math.sqrt(1 / 18 / draws.size)


# ---------------------------------------------------------------- sampling


def test_sample_index_degenerate(rng):
    sig = kofn_signature(5, 3)
    assert set(sample_failure_index(sig, rng, 1000).tolist()) == {3}
    assert sample_failure_index(sig, rng) == 3


@pytest.mark.parametrize(
    "sig,expected,draws",
    [
        (powerlaw_signature(4, 1), [0.25] * 4, 10**6),
        (powerlaw_signature(3, 2), [3 / 6, 2 / 6, 1 / 6], 10**5),
    ],
    ids=["uniform", "powerlaw2"],
)
def test_sample_index_frequencies(rng, sig, expected, draws):
    k = sample_failure_index(sig, rng, draws)
    freq = np.bincount(k, minlength=sig.n + 1)[1:] / draws
    se = np.sqrt(np.array(expected) * (1 - np.array(expected)) / draws)
    assert np.all(np.abs(freq - expected) <= 4 * se)
