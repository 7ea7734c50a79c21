"""Reduced-size oracle and invariant suites, shared by the CLI and the tests."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .inference import (
    EmpiricalDF,
    approx_p_value,
    basic_ci,
    bootstrap_test,
    generalized_inverse,
    two_sided_root_test,
)
from .metrics import (
    DiscreteMeasure,
    bl_distance,
    bl_distance_oracle,
    kolmogorov_distance,
    union_support,
)
from .statistics import ReplicateSet

ORACLE_TOL = 1e-9


def random_measure(rng: np.random.Generator, atoms: int, dim: int = 1, lattice: bool = False):
    """Random finitely supported measure; lattice supports make shared atoms likely."""
    if lattice:
        side = 2 * max(3, atoms) + 1
        flat = rng.choice(side**dim, size=atoms, replace=False)
        pts = np.column_stack(np.unravel_index(flat, (side,) * dim)).astype(float)
        pts = (pts - side // 2) * 0.5
    else:
        pts = rng.normal(scale=1.5, size=(atoms, dim))
    w = rng.random(atoms) + 0.05
    return DiscreteMeasure(pts[:, 0] if dim == 1 else pts, w / w.sum())


def random_pair(rng: np.random.Generator, max_union: int, dim: int = 1):
    """Two measures whose merged support has at most ``max_union`` points."""
    while True:
        a = int(rng.integers(1, max_union + 1))
        b = int(rng.integers(1, max_union + 1))
        lattice = bool(rng.random() < 0.5)
        p = random_measure(rng, a, dim, lattice)
        q = random_measure(rng, b, dim, lattice)
        if union_support(p, q)[0].shape[0] <= max_union:
            return p, q


def kolmogorov_bruteforce(p: DiscreteMeasure, q: DiscreteMeasure) -> float:
    """sup over the merged grid of |P(lower orthant) - Q(lower orthant)| in exact rationals."""
    pts, pp, qq = union_support(p, q)
    diff = [Fraction(a) - Fraction(b) for a, b in zip(pp, qq)]
    if pts.ndim == 1:
        corners = [(x,) for x in pts]
        coords = [(x,) for x in pts]
    else:
        xs = sorted(set(pts[:, 0].tolist()))
        ys = sorted(set(pts[:, 1].tolist()))
        corners = [(x, y) for x in xs for y in ys]
        coords = [tuple(row) for row in pts.tolist()]
    best = Fraction(0)
    for c in corners:
        s = sum(
            (d for d, z in zip(diff, coords) if all(zi <= ci for zi, ci in zip(z, c))),
            Fraction(0),
        )
        best = max(best, abs(s))
    return float(best)


def random_replicate_set(rng: np.random.Generator, max_m: int = 60) -> ReplicateSet:
    m = int(rng.integers(1, max_m + 1))
    vals = rng.normal(size=m)
    # s_n drawn independently: tie-free with probability one
    return ReplicateSet(float(rng.normal()), vals, int(rng.integers(1, 500)))


def duality_failures(rs: ReplicateSet, rng: np.random.Generator) -> list[str]:
    """Exact quantile, test/p-value and CI/test relations on one tie-free set."""
    bad = []
    F = EmpiricalDF(rs.replicates)
    y = float(rng.uniform(1e-9, 1.0))
    q = generalized_inverse(F, y)
    if not F(q) >= y:
        bad.append("F(F^-1(y)) >= y")
    x = float(rng.choice(rs.replicates)) if rng.random() < 0.5 else float(rng.normal())
    if F(x) > 0 and not generalized_inverse(F, F(x)) <= x:
        bad.append("F^-1(F(x)) <= x")
    y2 = float(rng.uniform(y, 1.0))
    if not generalized_inverse(F, y) <= generalized_inverse(F, y2):
        bad.append("monotone quantile")
    alpha = float(rng.uniform(0.001, 0.999))
    if bootstrap_test(rs, alpha).reject != (approx_p_value(rs) < alpha):
        bad.append("test/p-value duality")
    a2 = float(rng.uniform(0.001, 0.499))
    theta_n = float(rng.normal())
    theta0 = theta_n + float(rng.normal()) / math.sqrt(rs.n)
    ci = basic_ci(theta_n, rs, a2)
    if (not ci.contains(theta0)) != two_sided_root_test(theta_n, theta0, rs, a2):
        bad.append("CI/test duality")
    return bad


@dataclass
class CaseResult:
    name: str
    cases: int
    failure: str | None = None

    @property
    def passed(self) -> bool:
        return self.failure is None

    def line(self) -> str:
        if self.passed:
            return f"PASS {self.name} ({self.cases} cases)"
        return f"FAIL {self.name}: {self.failure}"


def _bl_oracle_suite(rng, cases):
    for k in range(cases):
        p, q = random_pair(rng, 6, dim=1 if k % 3 else 2)
        got, want = bl_distance(p, q), bl_distance_oracle(p, q)
        if not abs(got - want) <= ORACLE_TOL:
            return f"oracle case {k}: solver {got!r} vs oracle {want!r}"
    for name, p, q, want in _closed_forms():
        got = bl_distance(p, q)
        if not abs(got - want) <= ORACLE_TOL:
            return f"oracle case {name}: solver {got!r} vs closed form {want!r}"
    return None


def _closed_forms():
    d = DiscreteMeasure.point_mass
    half = DiscreteMeasure(np.array([0.0, 1.0]), np.array([0.5, 0.5]))
    return [
        ("delta0-delta1", d(0.0), d(1.0), 1.0),
        ("delta0-delta3", d(0.0), d(3.0), 2.0),
        ("half-delta0", half, d(0.0), 0.5),
    ]


def _adjacent_suite(rng, cases):
    for k in range(cases):
        p, q = random_pair(rng, 50, dim=1)
        a = bl_distance(p, q, constraints="adjacent")
        b = bl_distance(p, q, constraints="all")
        if not abs(a - b) <= ORACLE_TOL:
            return f"adjacent case {k}: {a!r} vs {b!r}"
    return None


def _kolmogorov_suite(rng, cases):
    for k in range(cases):
        p, q = random_pair(rng, 8, dim=1 if k % 2 else 2)
        got, want = kolmogorov_distance(p, q), kolmogorov_bruteforce(p, q)
        if got != want:
            return f"kolmogorov case {k}: {got!r} vs brute force {want!r}"
    return None


def _axiom_suite(rng, cases):
    for k in range(cases):
        p, q = random_pair(rng, 6, dim=1)
        r = random_measure(rng, int(rng.integers(1, 4)), 1, lattice=True)
        for name, dist in (("d_K", kolmogorov_distance), ("d_BL", bl_distance)):
            if dist(p, q) != dist(q, p):
                return f"axiom case {k}: {name} not symmetric"
            if dist(p, r) > dist(p, q) + dist(q, r) + ORACLE_TOL:
                return f"axiom case {k}: {name} triangle inequality"
            if abs(dist(p, p)) > ORACLE_TOL:
                return f"axiom case {k}: {name}(P, P) != 0"
    return None


def _duality_suite(rng, cases):
    for k in range(cases):
        bad = duality_failures(random_replicate_set(rng), rng)
        if bad:
            return f"duality case {k}: {', '.join(bad)}"
    return None


SUITES = (
    ("bl-oracle", _bl_oracle_suite, 150),
    ("bl-adjacent", _adjacent_suite, 20),
    ("kolmogorov-exact", _kolmogorov_suite, 150),
    ("metric-axioms", _axiom_suite, 40),
    ("inference-dualities", _duality_suite, 2000),
)


def run_selftest(seed: int = 0) -> list[CaseResult]:
    out = []
    for k, (name, suite, cases) in enumerate(SUITES):
        rng = np.random.default_rng([seed, k])
        out.append(CaseResult(name, cases, suite(rng, cases)))
    return out
