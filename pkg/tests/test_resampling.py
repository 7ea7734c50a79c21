import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as sps

from bootcheck.metrics import DiscreteMeasure, kolmogorov_distance
from bootcheck.rand_streams import StreamKey, derive_stream
from bootcheck.resampling import (
    Sample,
    Scheme,
    SchemeMismatchError,
    UnsupportedSchemeError,
    WeightVector,
    draw_weights,
    family_quantile,
    resample_block,
    resample_empirical,
    resample_parametric,
)


def stream(coord=1, epoch=0, seed=5):
    return derive_stream(StreamKey(seed, coord, epoch))


@given(n=st.integers(1, 300), coord=st.integers(1, 10_000))
@settings(max_examples=60, deadline=None)
def test_multinomial_counts_sum_to_n(n, coord):
    w = draw_weights(Scheme.MULTINOMIAL, n, stream(coord))
    assert w.values.shape == (n,)
    assert np.all(w.values >= 0)
    assert np.array_equal(w.values, np.round(w.values))
    assert w.values.sum() == n


def test_multinomial_n5():
    w = draw_weights("Multinomial", 5, stream())
    assert w.values.sum() == 5


@given(n=st.integers(1, 300), coord=st.integers(1, 10_000))
@settings(max_examples=60, deadline=None)
def test_dirichlet_on_simplex(n, coord):
    w = draw_weights(Scheme.DIRICHLET, n, stream(coord))
    assert np.all(w.values > 0)
    assert abs(w.values.sum() - 1.0) <= 1e-12


def test_rademacher_values_and_mean():
    w = draw_weights(Scheme.MULTIPLIER_RADEMACHER, 100_000, stream())
    assert set(np.unique(w.values)) == {-1.0, 1.0}
    assert abs(w.values.mean()) < 0.013


def test_parametric_uniform_range():
    w = draw_weights(Scheme.PARAMETRIC_UNIFORM, 10_000, stream())
    assert np.all((w.values >= 0) & (w.values < 1))


def test_block_weights_are_circular_blocks():
    w = draw_weights(Scheme.BLOCK, 10, stream(), block_length=3)
    assert len(w) == 10
    assert w.starts.size == 4
    idx = w.values.astype(int)
    for b, s in enumerate(w.starts):
        block = idx[3 * b : 3 * b + 3]
        assert np.array_equal(block, (s + np.arange(block.size)) % 10)


def test_unknown_scheme_rejected():
    with pytest.raises(UnsupportedSchemeError):
        draw_weights("Jackknife", 5, stream())


@pytest.mark.parametrize(
    "w, expected",
    [((2, 0, 1), (10, 10, 30)), ((1, 1, 1), (10, 20, 30)), ((0, 3, 0), (20, 20, 20))],
)
def test_resample_empirical_examples(w, expected):
    x = Sample(np.array([10.0, 20.0, 30.0]))
    wv = WeightVector(Scheme.MULTINOMIAL, np.array(w, dtype=float))
    assert resample_empirical(x, wv).values.tolist() == list(expected)


def test_resample_empirical_rejects_other_schemes():
    x = Sample(np.array([1.0, 2.0]))
    with pytest.raises(SchemeMismatchError):
        resample_empirical(x, WeightVector(Scheme.DIRICHLET, np.array([0.5, 0.5])))
    with pytest.raises(SchemeMismatchError):
        resample_empirical(x, WeightVector(Scheme.MULTINOMIAL, np.array([3.0])))


def test_resample_block_follows_indices():
    x = Sample(np.arange(5.0) * 10)
    w = WeightVector(Scheme.BLOCK, np.array([3.0, 4.0, 0.0, 1.0, 2.0]))
    assert resample_block(x, w).values.tolist() == [30, 40, 0, 10, 20]


def test_parametric_exponential_median():
    w = WeightVector(Scheme.PARAMETRIC_UNIFORM, np.array([0.5]))
    got = resample_parametric((1.0,), w, "exponential").values[0]
    assert got == pytest.approx(-math.log(0.5), abs=1e-15)
    # independent route: numeric inversion of the d.f.
    assert got == pytest.approx(sps.expon.ppf(0.5), abs=1e-12)


def test_parametric_normal_median():
    w = WeightVector(Scheme.PARAMETRIC_UNIFORM, np.array([0.5]))
    assert resample_parametric((0.0, 1.0), w, "normal").values[0] == 0.0


def test_parametric_is_monotone():
    u = np.sort(draw_weights(Scheme.PARAMETRIC_UNIFORM, 500, stream()).values)
    w = WeightVector(Scheme.PARAMETRIC_UNIFORM, u)
    for fam, theta in (("normal", (1.0, 2.0)), ("exponential", (3.0,))):
        out = resample_parametric(theta, w, fam).values
        assert np.all(np.diff(out) >= 0)


def test_parametric_rejects_bad_theta():
    w = WeightVector(Scheme.PARAMETRIC_UNIFORM, np.array([0.5]))
    with pytest.raises(ValueError):
        resample_parametric((0.0, -1.0), w, "normal")
    with pytest.raises(ValueError):
        family_quantile("cauchy", (1.0,), 0.5)


def test_weights_exchangeable_across_coordinates():
    first_i = [draw_weights(Scheme.MULTINOMIAL, 20, stream(1, e)).values[0] for e in range(5000)]
    first_j = [draw_weights(Scheme.MULTINOMIAL, 20, stream(2, e)).values[0] for e in range(5000)]
    d = kolmogorov_distance(DiscreteMeasure.from_samples(first_i), DiscreteMeasure.from_samples(first_j))
    assert d < 0.06


def test_replicates_on_distinct_coordinates_independent():
    from bootcheck.statistics import compute_replicates, draw_weight_matrix, mean_root

    scn = mean_root()
    x = stream(0).normal(100)
    a = compute_replicates(scn, x, "Multinomial", draw_weight_matrix("Multinomial", 100, 2000, 9, 0, first=1))
    b = compute_replicates(scn, x, "Multinomial", draw_weight_matrix("Multinomial", 100, 2000, 9, 0, first=2001))
    rho = sps.spearmanr(a, b).statistic
    assert abs(rho) < 4 / math.sqrt(2000)
