"""Quantiles, basic bootstrap intervals, bootstrap tests and p-values.

Quantiles follow the generalized inverse ``F^{-1}(y) = inf{x : F(x) >= y}``
of the replicate d.f. ``F(x) = #{i : S^(i) <= x} / M``.  Both sides are
evaluated in the same floating-point arithmetic, so the quantile/d.f.
relations hold exactly rather than up to rounding.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .metrics import DiscreteMeasure, kolmogorov_distance_to_cdf
from .rand_streams import Stream, StreamKey
from .statistics import (
    ReplicateSet,
    Scenario,
    ScenarioId,
    check_compatible,
    compute_replicates,
    draw_sample,
    draw_weight_matrix,
)


class EmpiricalDF:
    """Right-continuous step d.f. of a finite set of replicate values."""

    def __init__(self, values):
        v = np.sort(np.asarray(values, dtype=float).ravel())
        if v.size < 1:
            raise ValueError("an empirical d.f. needs at least one value")
        if not np.all(np.isfinite(v)):
            raise ValueError("values must be finite")
        v.setflags(write=False)
        self.sorted_values = v

    @property
    def m(self) -> int:
        return self.sorted_values.size

    def count(self, x) -> np.ndarray | int:
        return np.searchsorted(self.sorted_values, x, side="right")

    def __call__(self, x):
        c = self.count(x)
        if np.ndim(c) == 0:
            return int(c) / self.m
        return c / self.m


def _index(m: int, y: float) -> int:
    """Smallest k in 1..m with k / m >= y (float division, as in EmpiricalDF)."""
    k = min(max(math.ceil(y * m), 1), m)
    while k > 1 and (k - 1) / m >= y:
        k -= 1
    while k < m and k / m < y:
        k += 1
    return k


def generalized_inverse(F: EmpiricalDF, y: float) -> float:
    """inf{x : F(x) >= y}, i.e. the ceil(yM)-th order statistic."""
    if not 0.0 < y <= 1.0:
        raise ValueError(f"y must lie in (0, 1], got {y!r}")
    return float(F.sorted_values[_index(F.m, y) - 1])


@dataclass(frozen=True)
class ConfidenceInterval:
    lower: float
    upper: float
    level: float

    def __post_init__(self):
        if not self.lower <= self.upper:
            raise ValueError("interval bounds out of order")

    def contains(self, theta: float) -> bool:
        return self.lower <= theta <= self.upper


def basic_ci(theta_n: float, reps: ReplicateSet, alpha: float) -> ConfidenceInterval:
    """[theta_n - q(1 - a/2) / sqrt(n), theta_n - q(a/2) / sqrt(n)] from root replicates."""
    if not 0.0 < alpha < 0.5:
        raise ValueError(f"alpha must lie in (0, 1/2), got {alpha!r}")
    F = EmpiricalDF(reps.replicates)
    root_n = math.sqrt(reps.n)
    hi_q = generalized_inverse(F, 1.0 - alpha / 2.0)
    lo_q = generalized_inverse(F, alpha / 2.0)
    return ConfidenceInterval(theta_n - hi_q / root_n, theta_n - lo_q / root_n, 1.0 - alpha)


@dataclass(frozen=True)
class Decision:
    reject: bool
    critical: float


def bootstrap_test(reps: ReplicateSet, alpha: float) -> Decision:
    """Reject when S_n exceeds the (1 - alpha) replicate quantile."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    critical = generalized_inverse(EmpiricalDF(reps.replicates), 1.0 - alpha)
    return Decision(bool(reps.s_n > critical), critical)


def two_sided_root_test(theta_n: float, theta0: float, reps: ReplicateSet, alpha: float) -> bool:
    """Reject theta = theta0 when sqrt(n)(theta_n - theta0) leaves [q(a/2), q(1 - a/2)]."""
    F = EmpiricalDF(reps.replicates)
    root = math.sqrt(reps.n) * (theta_n - theta0)
    return bool(
        root > generalized_inverse(F, 1.0 - alpha / 2.0)
        or root < generalized_inverse(F, alpha / 2.0)
    )


def approx_p_value(reps: ReplicateSet) -> float:
    """Fraction of replicates strictly greater than S_n."""
    return int(np.count_nonzero(reps.replicates > reps.s_n)) / reps.m


@dataclass
class InferenceReport:
    n: int
    m: int
    reps: int
    alpha: float
    coverage: float
    one_sided_rate: float
    p_values: np.ndarray
    tie_freq: float

    @property
    def pvalue_dk(self) -> float:
        return uniformity_distance(self.p_values)


def uniformity_distance(p_values) -> float:
    """d_K between the empirical law of ``p_values`` and Uniform(0, 1)."""
    emp = DiscreteMeasure.from_samples(np.asarray(p_values, dtype=float))
    return kolmogorov_distance_to_cdf(emp, lambda t: np.clip(t, 0.0, 1.0))


def inference_experiment(
    scn: Scenario,
    scheme,
    n: int,
    m: int,
    reps: int,
    alpha: float,
    master_seed: int,
    block_length: int = 1,
) -> InferenceReport:
    """Coverage, one-sided level and p-values over ``reps`` fresh datasets.

    Repetition ``e`` draws its data from stream (seed, 0, e) and replicate
    ``i`` from (seed, i, e).  The root statistic is centred at the true mean,
    so the hypothesis behind the p-values holds in the data law.
    """
    if scn.id is not ScenarioId.MEAN_ROOT:
        raise ValueError("coverage needs a scenario with a known true parameter (MeanRoot)")
    scheme = check_compatible(scn, scheme)
    theta = scn.data_law.mean
    hits = one_sided = ties = 0
    p_values = np.empty(reps)
    for epoch in range(reps):
        x = draw_sample(scn, n, Stream(StreamKey(master_seed, 0, epoch)))
        W = draw_weight_matrix(scheme, n, m, master_seed, epoch, block_length)
        boot = compute_replicates(scn, x, scheme, W)
        theta_n = float(np.mean(x.values))
        s_n = math.sqrt(n) * (theta_n - theta)
        rs = ReplicateSet(s_n, boot, n)
        hits += basic_ci(theta_n, rs, alpha).contains(theta)
        one_sided += s_n >= generalized_inverse(EmpiricalDF(boot), 1.0 - alpha)
        ties += bool(np.any(boot == s_n))
        p_values[epoch] = approx_p_value(rs)
    return InferenceReport(n, m, reps, alpha, hits / reps, one_sided / reps, p_values, ties / reps)


def coverage_experiment(
    scn: Scenario, scheme, n: int, m: int, reps: int, alpha: float, master_seed: int
) -> float:
    """Fraction of repetitions whose basic interval covers the true mean."""
    return inference_experiment(scn, scheme, n, m, reps, alpha, master_seed).coverage


def pvalue_uniformity_experiment(
    scn: Scenario, scheme, n: int, m: int, reps: int, master_seed: int
) -> float:
    """d_K between the law of ``reps`` simulated p-values and Uniform(0, 1)."""
    return inference_experiment(scn, scheme, n, m, reps, 0.1, master_seed).pvalue_dk

