"""Monte Carlo checks of the equivalent forms of bootstrap consistency.

Each check compares a bootstrap-side object (replicate empirical measure,
conditional-law proxy, joint law of the first replicates) with an oracle for
the unobservable law of S_n or of its limit S.  Stream layout inside one
cell key space: coordinate 0 of epoch ``e`` is the data of repetition ``e``
and coordinate ``i >= 1`` the weights of its replicate ``i``.  Cells that
share ``n`` share datasets, so replicate sets are nested in ``M``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .metrics import (
    DiscreteMeasure,
    bl_distance,
    joint_product_gap,
    kolmogorov_distance,
    kolmogorov_distance_to_cdf,
    product_gap,
    thin_pair,
)
from .rand_streams import Stream, StreamKey, derive_seed
from .statistics import (
    ReplicateSet,
    Scenario,
    ScenarioId,
    check_compatible,
    compute_replicates,
    compute_statistic,
    draw_sample,
    draw_weight_matrix,
    grid_limit_rows,
    limit_law,
    replicate_set,
    statistic_rows,
)

LIMIT = "limit"
BL_CAP = 512
INCONSISTENCY_THRESHOLD = 0.10
CHEBYSHEV_EPS = 0.05
_ORACLE_CHUNK_VALUES = 4_000_000


@dataclass(frozen=True)
class LadderSpec:
    """Sample sizes, replicate counts and repetition counts of an experiment.

    ``cells="diagonal"`` pairs ``n_values[k]`` with ``m_values[k]``;
    ``cells="grid"`` takes every combination.
    """

    n_values: tuple[int, ...] = (50, 200, 800)
    m_values: tuple[int, ...] = (50, 200, 800)
    outer_reps: int = 200
    oracle_reps: int = 4000
    cells: str = "diagonal"

    def __post_init__(self):
        object.__setattr__(self, "n_values", tuple(int(v) for v in self.n_values))
        object.__setattr__(self, "m_values", tuple(int(v) for v in self.m_values))
        for name in ("n_values", "m_values"):
            vals = getattr(self, name)
            if not vals or min(vals) < 1:
                raise ValueError(f"{name} must be a non-empty list of counts >= 1")
            if any(b <= a for a, b in zip(vals, vals[1:])):
                raise ValueError(f"{name} must be strictly increasing")
        if self.outer_reps < 1 or self.oracle_reps < 1:
            raise ValueError("outer_reps and oracle_reps must be >= 1")
        if self.cells not in ("diagonal", "grid"):
            raise ValueError(f"cells must be 'diagonal' or 'grid', got {self.cells!r}")
        if self.cells == "diagonal" and len(self.n_values) != len(self.m_values):
            raise ValueError("a diagonal ladder needs as many n values as M values")

    @property
    def diagonal(self) -> list[tuple[int, int]]:
        return list(zip(self.n_values, self.m_values))

    def cell_list(self) -> list[tuple[int, int]]:
        if self.cells == "diagonal":
            return self.diagonal
        return [(n, m) for n in self.n_values for m in self.m_values]

    @property
    def n_big(self) -> int:
        return 20 * max(self.n_values)


def scenario_key(scn: Scenario) -> str:
    """Stable text identity of a scenario, used for seeding and caching."""
    law = scn.data_law
    return json.dumps(
        {
            "id": scn.id.value,
            "law": [law.family, float(law.loc).hex(), float(law.scale).hex()],
            "mu0": None if scn.mu0 is None else float(scn.mu0).hex(),
            "grid": [float(g).hex() for g in scn.grid],
            "gof": [scn.gof_family, scn.estimate],
            "theta": float(scn.theta).hex(),
        },
        sort_keys=True,
    )


def data_seed(master_seed: int, n: int) -> int:
    return derive_seed(master_seed, "data", n)


def oracle_seed(master_seed: int, scn: Scenario, n, reps: int) -> int:
    return derive_seed(master_seed, "oracle", scenario_key(scn), str(n), reps)


def statistic_draws(scn: Scenario, n: int, reps: int, seed: int) -> np.ndarray:
    """S_n on ``reps`` fresh datasets; dataset ``r`` uses stream (seed, 0, r)."""
    out = np.empty(reps)
    chunk = max(1, _ORACLE_CHUNK_VALUES // n)
    for start in range(0, reps, chunk):
        stop = min(reps, start + chunk)
        rows = np.vstack(
            [scn.data_law.draw(Stream(StreamKey(seed, 0, r)), n) for r in range(start, stop)]
        )
        out[start:stop] = statistic_rows(scn, rows)
    return out


def limit_draws(scn: Scenario, reps: int, seed: int, n_big: int | None = None) -> np.ndarray:
    """Draws of the weak limit S of S_n."""
    stream = Stream(StreamKey(seed, 0, 0))
    law = limit_law(scn)
    if scn.id is ScenarioId.MEAN_ROOT and law is not None:
        return law.std() * stream.normal(reps)
    if scn.id is ScenarioId.UNIFORM_MAX:
        return scn.theta * stream.exponential(reps)
    if scn.id is ScenarioId.GRID_PROCESS:
        return grid_limit_rows(scn, stream, reps)
    if n_big is None:
        raise ValueError(f"no closed-form limit for {scn.id.value}; an n_big is required")
    return statistic_draws(scn, n_big, reps, seed)


def oracle_law(
    scn: Scenario, n, reps: int, seed: int, n_big: int | None = None
) -> DiscreteMeasure:
    """Empirical law of ``reps`` independent draws of S_n (or of S if n is LIMIT)."""
    if reps < 1:
        raise ValueError("oracle needs reps >= 1")
    if n == LIMIT:
        values = limit_draws(scn, reps, seed, n_big)
    else:
        values = statistic_draws(scn, int(n), reps, seed)
    return DiscreteMeasure.from_samples(values)


def limit_reference(scn: Scenario, reps: int, seed: int, n_big: int | None = None):
    """Closed-form limit d.f. when known, else the simulated limit oracle."""
    law = limit_law(scn)
    if law is not None:
        return law.cdf
    return oracle_law(scn, LIMIT, reps, seed, n_big)


def distance_to(emp: DiscreteMeasure, reference) -> float:
    """d_K from a discrete measure to a discrete measure or a continuous d.f."""
    if isinstance(reference, DiscreteMeasure):
        return kolmogorov_distance(emp, reference)
    return kolmogorov_distance_to_cdf(emp, reference)


def thinned_bl(p: DiscreteMeasure, q: DiscreteMeasure, cap: int = BL_CAP) -> tuple[float, float]:
    """d_BL on supports thinned to ``cap`` atoms, with the thinning error bound."""
    tp, tq, err = thin_pair(p, q, cap)
    return bl_distance(tp, tq), err


def chebyshev_bound(m: int, eps: float = CHEBYSHEV_EPS, k: float = 1.0) -> float:
    """K / (eps^2 M): bound on P(|int f dP_M - int f dP^{S|X}| > eps), |f| <= sqrt(K)."""
    return min(1.0, k / (eps * eps * m))


def replicate_distances(
    rs: ReplicateSet, oracle, bl_cap: int = BL_CAP, with_bl: bool = True
) -> dict[str, float]:
    emp = DiscreteMeasure.from_samples(rs.replicates)
    out = {"d_k": distance_to(emp, oracle), "d_bl": math.nan, "d_bl_err": math.nan}
    if with_bl and isinstance(oracle, DiscreteMeasure):
        out["d_bl"], out["d_bl_err"] = thinned_bl(emp, oracle, bl_cap)
    return out


@dataclass
class TrendVerdict:
    metric: str
    cells: list[tuple[int, int]]
    values: list[float]
    violations: list[tuple[int, int]] = field(default_factory=list)

    @property
    def decreasing(self) -> bool:
        return not self.violations

    @property
    def verdict(self) -> str:
        return "decreasing" if self.decreasing else "non-monotone"


def trend_verdict(metric: str, cells, values) -> TrendVerdict:
    """Strict decrease along ``cells``; each cell not below its predecessor is a violation."""
    cells = [tuple(c) for c in cells]
    values = [float(v) for v in values]
    bad = [cells[k] for k in range(1, len(values)) if not values[k] < values[k - 1]]
    return TrendVerdict(metric, cells, values, bad)


@dataclass
class CellSummary:
    n: int
    m: int
    count: int
    median: dict[str, float]
    q75: dict[str, float]


@dataclass
class DiagnosticReport:
    assertion: str
    raw: dict[tuple[int, int], dict[str, np.ndarray]]
    summaries: list[CellSummary]
    trends: dict[str, TrendVerdict]
    notes: dict[str, float] = field(default_factory=dict)

    @classmethod
    def from_raw(cls, assertion: str, raw, diagonal, notes=None) -> "DiagnosticReport":
        summaries = []
        for (n, m), metrics in raw.items():
            med = {k: _nanquantile(v, 0.5) for k, v in metrics.items()}
            q75 = {k: _nanquantile(v, 0.75) for k, v in metrics.items()}
            count = len(next(iter(metrics.values()))) if metrics else 0
            summaries.append(CellSummary(n, m, count, med, q75))
        by_cell = {(s.n, s.m): s for s in summaries}
        trends = {}
        on_diag = [c for c in diagonal if c in by_cell]
        metric_names = sorted({k for s in summaries for k in s.median if not k.endswith("_err")})
        for name in metric_names:
            vals = [by_cell[c].median[name] for c in on_diag]
            if all(math.isfinite(v) for v in vals):
                trends[name] = trend_verdict(name, on_diag, vals)
        return cls(assertion, raw, summaries, trends, dict(notes or {}))

    def summary(self, n: int, m: int) -> CellSummary:
        for s in self.summaries:
            if (s.n, s.m) == (n, m):
                return s
        raise KeyError((n, m))


def _nanquantile(v, q: float) -> float:
    v = np.asarray(v, dtype=float)
    if v.size == 0 or np.all(np.isnan(v)):
        return math.nan
    return float(np.nanquantile(v, q))


def check_assertion_d(
    scn: Scenario,
    scheme,
    ladder: LadderSpec,
    master_seed: int,
    *,
    block_length: int = 1,
    bl_cap: int = BL_CAP,
    with_bl: bool = True,
    oracles: dict | None = None,
) -> DiagnosticReport:
    """Distances between replicate empirical measures and the law of S_n.

    For every cell ``(n, M)`` and outer repetition: one dataset, ``M``
    replicates, then d_K (and d_BL on thinned supports) to the oracle for
    P^{S_n}.  ``oracles`` may map ``n`` to a prebuilt (or fixed) reference.
    """
    check_compatible(scn, scheme)
    oracles = dict(oracles or {})
    raw = {}
    for n, m in ladder.cell_list():
        if n not in oracles:
            oracles[n] = oracle_law(
                scn, n, ladder.oracle_reps, oracle_seed(master_seed, scn, n, ladder.oracle_reps)
            )
        seed = data_seed(master_seed, n)
        rows = []
        for epoch in range(ladder.outer_reps):
            x = draw_sample(scn, n, Stream(StreamKey(seed, 0, epoch)))
            rs = replicate_set(scn, scheme, x, m, seed, epoch, block_length)
            d = replicate_distances(rs, oracles[n], bl_cap, with_bl)
            rows.append((d["d_k"], d["d_bl"], d["d_bl_err"]))
        arr = np.array(rows)
        raw[(n, m)] = {"d_k": arr[:, 0], "d_bl": arr[:, 1], "d_bl_err": arr[:, 2]}
    notes = {f"chebyshev_M{m}": chebyshev_bound(m) for m in sorted({m for _, m in raw})}
    return DiagnosticReport.from_raw("d", raw, ladder.diagonal, notes)


def replicate_tuples(
    scn: Scenario,
    scheme,
    n: int,
    reps: int,
    master_seed: int,
    k: int = 2,
    block_length: int = 1,
) -> np.ndarray:
    """Rows ``(S_n, S_n^(1), ..., S_n^(k))``, one per outer repetition."""
    check_compatible(scn, scheme)
    seed = data_seed(master_seed, n)
    out = np.empty((reps, k + 1))
    for epoch in range(reps):
        x = draw_sample(scn, n, Stream(StreamKey(seed, 0, epoch)))
        W = draw_weight_matrix(scheme, n, k, seed, epoch, block_length)
        out[epoch, 0] = compute_statistic(scn, x)
        out[epoch, 1:] = compute_replicates(scn, x, scheme, W)
    return out


@dataclass
class PairReport:
    """Assertion (a) summary for one sample size.

    ``marginal_dk``: d_K of S_n, S^(1), S^(2) to the limit.  Pair gaps keyed by
    ``"S1,S2"`` and ``"Sn,S1"``: ``independence_gaps`` compare a joint law with
    the product of its own marginals, ``limit_gaps`` with P^S x P^S.
    """

    n: int
    reps: int
    marginal_dk: tuple[float, float, float]
    independence_gaps: dict[str, float]
    limit_gaps: dict[str, float]
    zero_freq: float

    def consistent(self, threshold: float = INCONSISTENCY_THRESHOLD) -> bool:
        return max(self.marginal_dk) < threshold and max(self.limit_gaps.values()) < threshold


def _pair_gaps(a: np.ndarray, b: np.ndarray, limit) -> tuple[float, float]:
    joint = DiscreteMeasure.from_samples(np.column_stack([a, b]))
    own = joint_product_gap(joint, joint.marginal(0), joint.marginal(1))
    return own, product_gap(joint, limit, limit)


def pair_report(triples: np.ndarray, limit, n: int) -> PairReport:
    """Assertion (a) statistics from rows ``(S_n, S^(1), S^(2))``."""
    t = np.asarray(triples, dtype=float)
    marg = tuple(distance_to(DiscreteMeasure.from_samples(t[:, j]), limit) for j in range(3))
    own12, lim12 = _pair_gaps(t[:, 1], t[:, 2], limit)
    own01, lim01 = _pair_gaps(t[:, 0], t[:, 1], limit)
    return PairReport(
        n,
        t.shape[0],
        marg,
        {"S1,S2": own12, "Sn,S1": own01},
        {"S1,S2": lim12, "Sn,S1": lim01},
        float(np.mean(t[:, 1:3] == 0.0)),
    )


def check_assertion_a(
    scn: Scenario,
    scheme,
    n_values,
    reps: int,
    master_seed: int,
    *,
    block_length: int = 1,
    limit=None,
    limit_reps: int = 4000,
) -> dict[int, PairReport]:
    """Joint law of (S_n, S^(1), S^(2)) against the product of limit laws."""
    if limit is None:
        n_big = 20 * max(n_values)
        limit = limit_reference(
            scn, limit_reps, oracle_seed(master_seed, scn, LIMIT, limit_reps), n_big
        )
    out = {}
    for n in n_values:
        t = replicate_tuples(scn, scheme, n, reps, master_seed, 2, block_length)
        out[n] = pair_report(t, limit, n)
    return out


def check_assertion_b(
    scn: Scenario,
    scheme,
    n: int,
    reps: int,
    master_seed: int,
    *,
    k: int = 4,
    block_length: int = 1,
    limit=None,
    limit_reps: int = 4000,
) -> dict[tuple[int, int], tuple[float, float]]:
    """All pairwise (independence, limit-product) gaps among (S_n, S^(1..k))."""
    if limit is None:
        limit = limit_reference(
            scn, limit_reps, oracle_seed(master_seed, scn, LIMIT, limit_reps), 20 * n
        )
    t = replicate_tuples(scn, scheme, n, reps, master_seed, k, block_length)
    return {
        (i, j): _pair_gaps(t[:, i], t[:, j], limit)
        for i in range(k + 1)
        for j in range(i + 1, k + 1)
    }


@dataclass
class ConditionalReport:
    """Distances between M_inner-replicate proxies of the conditional law and an oracle.

    This approximates the conditional-law assertion with finitely many
    replicates; ``chebyshev_bound`` is the M_inner-implied tolerance.
    """

    n: int
    m_inner: int
    d_k: np.ndarray
    d_bl: np.ndarray
    d_bl_err: np.ndarray
    chebyshev_bound: float
    label: str = "M_inner approximation of the conditional law"

    def quantile(self, q: float, metric: str = "d_k") -> float:
        return _nanquantile(getattr(self, metric), q)


def check_assertion_c(
    scn: Scenario,
    scheme,
    n: int,
    m_inner: int,
    reps: int,
    oracle_reps: int,
    master_seed: int,
    *,
    oracle=None,
    block_length: int = 1,
    bl_cap: int = BL_CAP,
    with_bl: bool = True,
    eps: float = CHEBYSHEV_EPS,
) -> ConditionalReport:
    """Conditional law proxies on ``reps`` datasets against P^{S_n}.

    ``oracle``: None for the simulated law of S_n, LIMIT for the limit law,
    or a fixed measure / d.f. callable.
    """
    check_compatible(scn, scheme)
    if oracle is None:
        oracle = oracle_law(scn, n, oracle_reps, oracle_seed(master_seed, scn, n, oracle_reps))
    elif isinstance(oracle, str) and oracle == LIMIT:
        oracle = limit_reference(
            scn, oracle_reps, oracle_seed(master_seed, scn, LIMIT, oracle_reps), 20 * n
        )
    seed = data_seed(master_seed, n)
    rows = []
    for epoch in range(reps):
        x = draw_sample(scn, n, Stream(StreamKey(seed, 0, epoch)))
        rs = replicate_set(scn, scheme, x, m_inner, seed, epoch, block_length)
        d = replicate_distances(rs, oracle, bl_cap, with_bl)
        rows.append((d["d_k"], d["d_bl"], d["d_bl_err"]))
    arr = np.array(rows).reshape(-1, 3)
    return ConditionalReport(
        n, m_inner, arr[:, 0], arr[:, 1], arr[:, 2], chebyshev_bound(m_inner, eps)
    )
