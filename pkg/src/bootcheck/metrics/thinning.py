"""Support thinning that keeps d_BL computations small."""
from __future__ import annotations

import numpy as np

from .measures import DiscreteMeasure, union_support


def thin_pair(p: DiscreteMeasure, q: DiscreteMeasure, cap: int = 512):
    """Quantize two d=1 measures onto at most ``cap`` shared atoms.

    The merged sorted support is cut into ``cap`` strata of consecutive points
    with near-equal counts; each stratum's mass (for P and for Q) moves to the
    stratum midpoint.  Mass in stratum ``s`` moves at most its half-width
    ``h_s`` and every BL_1 function is 1-Lipschitz, so the thinned distance is
    within ``sum_s (P(s) + Q(s)) h_s`` of the original.  Returns
    ``(p', q', bound)``.
    """
    pts, pp, qq = union_support(p, q)
    if pts.ndim != 1:
        raise ValueError("thinning is implemented for d=1 measures")
    if pts.size <= cap:
        return p, q, 0.0
    edges = np.linspace(0, pts.size, cap + 1).round().astype(np.int64)
    lo_idx, hi_idx = edges[:-1], edges[1:] - 1
    mids = 0.5 * (pts[lo_idx] + pts[hi_idx])
    half = 0.5 * (pts[hi_idx] - pts[lo_idx])
    p_mass = np.add.reduceat(pp, lo_idx)
    q_mass = np.add.reduceat(qq, lo_idx)
    return (
        _compact(mids, p_mass),
        _compact(mids, q_mass),
        float(((p_mass + q_mass) * half).sum()),
    )


def _compact(points, mass):
    keep = mass > 0
    w = mass[keep]
    return DiscreteMeasure(points[keep], w / w.sum())
