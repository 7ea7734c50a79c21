"""Bounded-Lipschitz distance between finitely supported measures.

Restricted to the union support {x_1, ..., x_m}, the supremum over BL_1 is the
LP

    maximize  sum_i c_i f_i,   c_i = P(x_i) - Q(x_i)
    s.t.      -1 <= f_i <= 1,  |f_i - f_j| <= d(x_i, x_j)

(any feasible vector extends to a BL_1 function on the whole space by
McShane's construction clipped to [-1, 1]).  Each Lipschitz row is written as
``f_i - f_j + s_ij = 0`` with a boxed slack ``s_ij`` in ``[-d_ij, d_ij]``.
"""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass

import numpy as np

from .measures import DiscreteMeasure, union_support
from .simplex import LPError, bounded_simplex

ORACLE_MAX_ATOMS = 6
FEAS_TOL = 1e-9
METRICS = ("euclidean",)

# selftest hook: added to every solver result when non-zero
_lp_perturbation = 0.0


class SupportTooLargeError(ValueError):
    pass


def set_lp_perturbation(eps: float) -> None:
    global _lp_perturbation
    _lp_perturbation = float(eps)


@dataclass(frozen=True)
class LPProblem:
    c: np.ndarray
    pairs: np.ndarray  # (k, 2) index pairs, each unordered pair at most once
    bounds: np.ndarray  # (k,) Lipschitz bound d(x_i, x_j)

    @property
    def size(self) -> int:
        return self.c.size


def distance_matrix(points: np.ndarray, metric: str = "euclidean") -> np.ndarray:
    if metric not in METRICS:
        raise ValueError(f"unsupported ground metric: {metric!r}")
    pts = points if points.ndim == 2 else points[:, None]
    return np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=-1))


def build_lp(
    p: DiscreteMeasure, q: DiscreteMeasure, metric: str = "euclidean", constraints: str = "auto"
) -> tuple[np.ndarray, LPProblem]:
    """Assemble the LP on the union support.

    ``constraints``: ``"all"`` keeps every pair, ``"adjacent"`` keeps only
    neighbours in sorted order (valid for d=1 only, where the triangle
    inequality implies the rest), ``"auto"`` picks adjacent for d=1.
    Pairs with ``d >= 2`` are dropped: the box already enforces them.
    """
    pts, pp, qq = union_support(p, q)
    c = pp - qq
    m = c.size
    if constraints == "auto":
        constraints = "adjacent" if p.dim == 1 else "all"
    if constraints == "adjacent":
        if p.dim != 1:
            raise ValueError("adjacent-only constraints are exact only in d=1")
        if metric not in METRICS:
            raise ValueError(f"unsupported ground metric: {metric!r}")
        i = np.arange(m - 1)
        pairs = np.column_stack([i, i + 1])
        bounds = np.diff(pts)  # union_support returns sorted points
    elif constraints == "all":
        D = distance_matrix(pts, metric)
        iu, ju = np.triu_indices(m, k=1)
        pairs = np.column_stack([iu, ju])
        bounds = D[iu, ju]
    else:
        raise ValueError(f"unknown constraint mode: {constraints!r}")
    keep = bounds < 2.0
    return pts, LPProblem(c, pairs[keep].reshape(-1, 2), bounds[keep])


def solve_lp(problem: LPProblem) -> float:
    m = problem.size
    c = problem.c
    nz = np.flatnonzero(c)
    if nz.size == 0:
        return 0.0
    # the feasible set is symmetric under f -> -f, so c and -c share the optimum;
    # fixing the sign makes d(P, Q) and d(Q, P) solve the identical LP
    if c[nz[0]] < 0:
        c = -c
    k = problem.pairs.shape[0]
    if k == 0:
        # no active Lipschitz rows: f_i = sign(c_i)
        return float(np.abs(c).sum())
    A = np.zeros((k, m + k))
    rows = np.arange(k)
    A[rows, problem.pairs[:, 0]] = 1.0
    A[rows, problem.pairs[:, 1]] = -1.0
    A[rows, m + rows] = 1.0
    lo = np.concatenate([-np.ones(m), -problem.bounds])
    hi = np.concatenate([np.ones(m), problem.bounds])
    x0 = np.concatenate([-np.ones(m), np.zeros(k)])
    obj = np.concatenate([c, np.zeros(k)])
    res = bounded_simplex(obj, A, np.zeros(k), lo, hi, m + rows, x0)
    if not np.isfinite(res.objective):
        raise LPError("non-finite LP optimum")
    return res.objective


def bl_distance(
    p: DiscreteMeasure, q: DiscreteMeasure, metric: str = "euclidean", constraints: str = "auto"
) -> float:
    """d_BL(P, Q) as the optimum of the restricted LP; lies in [0, 2]."""
    _, problem = build_lp(p, q, metric, constraints)
    value = solve_lp(problem)
    return max(value, 0.0) + _lp_perturbation


@functools.lru_cache(maxsize=None)
def _tree_tables(m: int):
    """Parent arrays and root-path matrices of all labeled trees on {0..m}.

    Node 0 stands for the box constraints f = +-1; trees come from Pruefer
    sequences, rooted at node 0.
    """
    n_nodes = m + 1
    parents, paths = [], []
    for seq in itertools.product(range(n_nodes), repeat=max(n_nodes - 2, 0)):
        edges = _pruefer_edges(list(seq), n_nodes)
        adj = {v: [] for v in range(n_nodes)}
        for a, b in edges:
            adj[a].append(b)
            adj[b].append(a)
        parent = [-1] * n_nodes
        order = [0]
        seen = {0}
        for v in order:
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    parent[w] = v
                    order.append(w)
        path = np.zeros((m, m))
        for node in range(1, n_nodes):
            v = node
            while v != 0:
                path[node - 1, v - 1] = 1.0
                v = parent[v]
        parents.append(parent[1:])
        paths.append(path)
    return np.array(parents, dtype=np.int64), np.array(paths)


def _pruefer_edges(seq: list[int], n_nodes: int) -> list[tuple[int, int]]:
    degree = [1] * n_nodes
    for s in seq:
        degree[s] += 1
    edges = []
    for s in seq:
        leaf = min(v for v in range(n_nodes) if degree[v] == 1)
        edges.append((leaf, s))
        degree[leaf] -= 1
        degree[s] -= 1
    u, v = [w for w in range(n_nodes) if degree[w] == 1]
    edges.append((u, v))
    return edges


def bl_distance_oracle(p: DiscreteMeasure, q: DiscreteMeasure, metric: str = "euclidean") -> float:
    """d_BL by enumerating every basic solution of the LP.

    A basic solution fixes m linearly independent constraints at equality.
    Viewing ``f_i = +-1`` as an edge to a ground node and ``f_i - f_j = +-d_ij``
    as an edge between atoms, independence means the chosen edges form a
    spanning tree on the m atoms plus ground.  All trees times all sign
    patterns are enumerated; the best feasible one is the optimum.
    """
    pts, pp, qq = union_support(p, q)
    c = pp - qq
    m = c.size
    if m > ORACLE_MAX_ATOMS:
        raise SupportTooLargeError(f"oracle handles at most {ORACLE_MAX_ATOMS} atoms, got {m}")
    D = distance_matrix(pts, metric)
    parents, paths = _tree_tables(m)
    ext = np.hstack([np.ones((m, 1)), D])  # column 0: distance to ground = 1
    mags = ext[np.arange(m)[None, :], parents]  # (T, m)
    # the feasible set is symmetric under f -> -f, so fix the first sign
    signs = np.array([(1.0,) + s for s in itertools.product((-1.0, 1.0), repeat=m - 1)]).T
    weighted = (paths * mags[:, None, :]).reshape(-1, m)
    f = (weighted @ signs).reshape(-1, m, signs.shape[1]).transpose(1, 0, 2).reshape(m, -1)
    f = f[:, np.abs(f).max(axis=0) <= 1.0 + FEAS_TOL]
    for i, j in itertools.combinations(range(m), 2):
        f = f[:, np.abs(f[i] - f[j]) <= D[i, j] + FEAS_TOL]
    return float(np.abs(c @ f).max())
