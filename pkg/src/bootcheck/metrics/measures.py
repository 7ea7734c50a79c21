from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PROB_SUM_TOL = 1e-10


class DimensionMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class DiscreteMeasure:
    """Finitely supported probability measure on R or R^2.

    ``support`` has shape ``(m,)`` for d=1 or ``(m, 2)`` for d=2.  Points must be
    pairwise distinct and ``probs`` must sum to one within 1e-10.
    """

    support: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.support, dtype=float)
        p = np.asarray(self.probs, dtype=float).ravel()
        if s.ndim == 2 and s.shape[1] == 1:
            s = s[:, 0]
        if s.ndim not in (1, 2) or (s.ndim == 2 and s.shape[1] != 2):
            raise DimensionMismatchError("support must be shape (m,) or (m, 2)")
        if s.shape[0] < 1 or s.shape[0] != p.size:
            raise ValueError("support and probs must be non-empty and of equal length")
        if not (np.all(np.isfinite(s)) and np.all(np.isfinite(p))):
            raise ValueError("support and probs must be finite")
        if np.any(p < 0):
            raise ValueError("probabilities must be non-negative")
        if abs(p.sum() - 1.0) > PROB_SUM_TOL:
            raise ValueError(f"probabilities sum to {p.sum()!r}, not 1")
        key = s if s.ndim == 1 else s.view([("x", float), ("y", float)]).ravel()
        if np.unique(key).size != s.shape[0]:
            raise ValueError("support points must be pairwise distinct")
        s.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "support", s)
        object.__setattr__(self, "probs", p)

    @property
    def dim(self) -> int:
        return 1 if self.support.ndim == 1 else 2

    def __len__(self):
        return self.probs.size

    @classmethod
    def point_mass(cls, x) -> "DiscreteMeasure":
        x = np.atleast_1d(np.asarray(x, dtype=float))
        support = x if x.size == 1 else x[None, :]
        return cls(support, np.array([1.0]))

    @classmethod
    def from_samples(cls, values) -> "DiscreteMeasure":
        """Empirical measure of ``values``; exactly equal values are merged."""
        v = np.asarray(values, dtype=float)
        if v.ndim == 1:
            support, counts = np.unique(v, return_counts=True)
        else:
            support, counts = np.unique(v, axis=0, return_counts=True)
        return cls(support, counts / v.shape[0])

    def marginal(self, axis: int) -> "DiscreteMeasure":
        if self.dim != 2:
            raise DimensionMismatchError("marginals exist only for d=2 measures")
        pts, inv = np.unique(self.support[:, axis], return_inverse=True)
        mass = np.zeros(pts.size)
        np.add.at(mass, inv, self.probs)
        return DiscreteMeasure(pts, mass)

    def cdf(self, x) -> np.ndarray:
        """Right-continuous d.f. of a d=1 measure."""
        if self.dim != 1:
            raise DimensionMismatchError("cdf() is for d=1 measures")
        order = np.argsort(self.support)
        cum = np.cumsum(self.probs[order])
        idx = np.searchsorted(self.support[order], np.asarray(x, dtype=float), side="right")
        return np.where(idx > 0, cum[np.maximum(idx - 1, 0)], 0.0)


def union_support(p: DiscreteMeasure, q: DiscreteMeasure):
    """Merged support and the two probability vectors aligned on it."""
    if p.dim != q.dim:
        raise DimensionMismatchError(f"dimension mismatch: {p.dim} vs {q.dim}")
    both = np.concatenate([p.support, q.support], axis=0)
    if p.dim == 1:
        pts, inv = np.unique(both, return_inverse=True)
    else:
        pts, inv = np.unique(both, axis=0, return_inverse=True)
    inv = np.asarray(inv).ravel()
    pp = np.zeros(len(pts))
    qq = np.zeros(len(pts))
    np.add.at(pp, inv[: len(p)], p.probs)
    np.add.at(qq, inv[len(p):], q.probs)
    return pts, pp, qq


def total_variation(p: DiscreteMeasure, q: DiscreteMeasure) -> float:
    _, pp, qq = union_support(p, q)
    return 0.5 * float(np.abs(pp - qq).sum())
