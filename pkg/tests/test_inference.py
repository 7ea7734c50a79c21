import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bootcheck.inference import (
    ConfidenceInterval,
    EmpiricalDF,
    approx_p_value,
    basic_ci,
    bootstrap_test,
    coverage_experiment,
    generalized_inverse,
    inference_experiment,
    pvalue_uniformity_experiment,
    two_sided_root_test,
    uniformity_distance,
)
from bootcheck.selftest import duality_failures, random_replicate_set
from bootcheck.statistics import ReplicateSet, mean_root, uniform_max

reals = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


def rs(values, s_n=0.0, n=100):
    return ReplicateSet(float(s_n), np.asarray(values, dtype=float), n)


def test_generalized_inverse_examples():
    F = EmpiricalDF([1, 2, 3, 4])
    assert generalized_inverse(F, 0.5) == 2.0
    assert generalized_inverse(F, 0.51) == 3.0
    assert generalized_inverse(F, 1.0) == 4.0
    G = EmpiricalDF([5.0])
    assert all(generalized_inverse(G, y) == 5.0 for y in (1e-9, 0.3, 1.0))


@pytest.mark.parametrize("y", [0.0, -0.1, 1.0000001, math.nan])
def test_generalized_inverse_domain(y):
    with pytest.raises(ValueError):
        generalized_inverse(EmpiricalDF([1.0]), y)


@given(values=st.lists(reals, min_size=1, max_size=50), y=st.floats(1e-12, 1.0), x=reals)
@settings(max_examples=300, deadline=None)
def test_galois_connection(values, y, x):
    F = EmpiricalDF(values)
    assert F(generalized_inverse(F, y)) >= y
    if F(x) > 0:
        assert generalized_inverse(F, F(x)) <= x


@given(values=st.lists(reals, min_size=1, max_size=50), a=st.floats(1e-12, 1.0), b=st.floats(1e-12, 1.0))
@settings(max_examples=200, deadline=None)
def test_quantile_monotone(values, a, b):
    F = EmpiricalDF(values)
    lo, hi = min(a, b), max(a, b)
    assert generalized_inverse(F, lo) <= generalized_inverse(F, hi)


@given(m=st.integers(1, 5000), y=st.floats(1e-12, 1.0))
@settings(max_examples=300, deadline=None)
def test_quantile_is_smallest_index(m, y):
    # independent route: linear scan of the step function
    F = EmpiricalDF(np.arange(m, dtype=float))
    q = generalized_inverse(F, y)
    k = int(q) + 1
    assert k / m >= y and (k == 1 or (k - 1) / m < y)


def test_basic_ci_zero_replicates():
    ci = basic_ci(1.0, rs(np.zeros(50)), 0.1)
    assert (ci.lower, ci.upper) == (1.0, 1.0)


def test_basic_ci_hand_example():
    reps = rs(np.repeat([-2.0, -1.0, 0.0, 1.0, 2.0], 200), n=100)
    ci = basic_ci(0.3, reps, 0.2)
    assert ci.lower == pytest.approx(0.1, abs=1e-15)
    assert ci.upper == pytest.approx(0.5, abs=1e-15)
    assert ci.level == pytest.approx(0.8)


def test_basic_ci_symmetric_replicates():
    v = np.linspace(-3, 3, 101)
    ci = basic_ci(2.0, rs(np.concatenate([v, -v])), 0.1)
    assert (2.0 - ci.lower) == pytest.approx(ci.upper - 2.0, abs=1e-12)


@pytest.mark.parametrize("alpha", [0.0, 0.5, 0.7])
def test_basic_ci_alpha_domain(alpha):
    with pytest.raises(ValueError):
        basic_ci(0.0, rs([1.0]), alpha)


def test_interval_order_checked():
    with pytest.raises(ValueError):
        ConfidenceInterval(1.0, 0.0, 0.9)


def test_bootstrap_test_examples():
    assert not bootstrap_test(rs([1, 2, 3], s_n=0.0), 0.1).reject
    assert bootstrap_test(rs([1, 2, 3], s_n=4.0), 0.1).reject
    d = bootstrap_test(rs(np.arange(1, 11), s_n=7.5), 0.3)
    assert d.critical == 7.0 and d.reject


def test_p_value_examples():
    assert approx_p_value(rs([1, 2, 3, 4], s_n=2.5)) == 0.5
    assert approx_p_value(rs([1, 2, 3], s_n=9.0)) == 0.0
    assert approx_p_value(rs([1, 2, 3, 4], s_n=0.5)) == 1.0
    # S_n equal to the smallest replicate: the tie is not counted
    assert approx_p_value(rs([1, 2, 3, 4], s_n=1.0)) == 0.75


def test_test_pvalue_boundary_case():
    # alpha * M an integer: reject <=> p <= alpha (strict '<' fails only here)
    r = rs(np.arange(1, 11), s_n=8.5)
    assert approx_p_value(r) == 0.2
    assert bootstrap_test(r, 0.2).reject


def test_dualities_on_random_sets():
    rng = np.random.default_rng(4)
    for _ in range(3000):
        assert duality_failures(random_replicate_set(rng), rng) == []


def test_root_test_matches_interval():
    r = rs(np.linspace(-2, 2, 41), n=16)
    ci = basic_ci(1.0, r, 0.1)
    for theta0 in np.linspace(-1, 3, 81):
        assert (not ci.contains(theta0)) == two_sided_root_test(1.0, theta0, r, 0.1)


def test_uniformity_distance_of_grid():
    n = 300
    # 1/N exactly; the final subtraction of two values in [0, 1] may round by ulp(1)
    assert uniformity_distance((np.arange(n) + 1) / n) <= 1 / n + math.ulp(1.0)


def test_single_replicate_pvalues():
    rep = inference_experiment(mean_root(), "Multinomial", 50, 1, 400, 0.1, 3)
    freq0 = float(np.mean(rep.p_values == 0.0))
    assert set(np.unique(rep.p_values)) <= {0.0, 1.0}
    assert rep.pvalue_dk == pytest.approx(max(freq0, 1 - freq0), abs=1e-15)
    assert abs(rep.pvalue_dk - 0.5) < 0.08


def test_small_alpha_coverage():
    assert coverage_experiment(mean_root(), "Multinomial", 200, 500, 400, 0.002, 7) >= 0.99


def test_degenerate_data_coverage():
    from bootcheck.statistics import Scenario, DataLaw

    scn = Scenario("MeanRoot", DataLaw("point", 2.5, 0.0), mu0=2.5)
    rep = inference_experiment(scn, "Multinomial", 20, 30, 10, 0.1, 1)
    assert rep.coverage == 1.0
    ci = basic_ci(2.5, rs(np.zeros(30), n=20), 0.1)
    assert not ci.contains(2.4)


def test_inference_report_fields():
    rep = inference_experiment(mean_root(), "Multinomial", 40, 60, 50, 0.1, 2)
    assert rep.p_values.shape == (50,)
    assert 0 <= rep.coverage <= 1 and 0 <= rep.one_sided_rate <= 1
    assert rep.tie_freq == 0.0
    again = pvalue_uniformity_experiment(mean_root(), "Multinomial", 40, 60, 50, 2)
    assert again == rep.pvalue_dk


def test_coverage_needs_known_parameter():
    with pytest.raises(ValueError):
        inference_experiment(uniform_max(), "Multinomial", 10, 10, 2, 0.1, 1)
