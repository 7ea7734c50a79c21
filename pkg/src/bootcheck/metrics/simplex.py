"""Dense primal simplex for bounded-variable LPs in equality form.

Solves ``max c @ x  s.t.  A @ x = b,  lo <= x <= hi`` from a caller supplied
basic feasible solution.  The tableau is kept in condensed form: only the
``B^{-1} N`` block over the nonbasic columns is stored, so a pivot costs
``rows x nonbasic`` instead of ``rows x all columns``.  Every variable is
boxed, hence the LP is never unbounded.

Pricing is Dantzig's rule with lowest-index tie breaking; after a run of
degenerate pivots the method switches to Bland's rule, which cannot cycle.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

OPT_TOL = 1e-9
PIVOT_TOL = 1e-12
DEGENERATE_RUN = 50


class LPError(RuntimeError):
    pass


@dataclass
class LPResult:
    x: np.ndarray
    objective: float
    pivots: int
    bound_flips: int


def bounded_simplex(c, A, b, lo, hi, basis, x0, max_iter: int = 1_000_000) -> LPResult:
    """Maximize ``c @ x`` from the basic feasible solution ``(basis, x0)``.

    ``A[:, basis]`` must be the identity and ``x0`` must satisfy
    ``A @ x0 = b`` with every nonbasic entry at one of its bounds.
    """
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    x = np.array(x0, dtype=float)
    basis = np.array(basis, dtype=np.int64)
    rows, cols = A.shape
    head = A[:, basis]
    if np.count_nonzero(head) != rows or np.any(np.diagonal(head) != 1.0):
        raise LPError("initial basis columns must form the identity")
    if np.any(x < lo - 1e-12) or np.any(x > hi + 1e-12):
        raise LPError("initial point violates the variable bounds")
    if rows and np.max(np.abs(A @ x - b)) > 1e-9:
        raise LPError("initial point violates the equality constraints")

    mask = np.ones(cols, dtype=bool)
    mask[basis] = False
    nonbasic = np.flatnonzero(mask)
    T = A[:, nonbasic].copy()  # B^{-1} N with B = I
    r = c[nonbasic] - c[basis] @ T

    pivots = flips = 0
    degenerate = 0
    bland = False
    for _ in range(max_iter):
        xn = x[nonbasic]
        at_lo = (xn <= lo[nonbasic]) & (r > OPT_TOL)
        at_hi = (xn >= hi[nonbasic]) & (r < -OPT_TOL)
        eligible = np.flatnonzero(at_lo | at_hi)
        if eligible.size == 0:
            return LPResult(x, float(c @ x), pivots, flips)
        if bland:
            q = int(eligible[np.argmin(nonbasic[eligible])])
        else:
            q = int(eligible[np.argmax(np.abs(r[eligible]))])
        j = int(nonbasic[q])
        direction = 1.0 if at_lo[q] else -1.0

        # moving x_j by direction * t moves x_B by -direction * t * T[:, q]
        alpha = direction * T[:, q]
        step = hi[j] - lo[j]
        leave = -1
        nz = np.flatnonzero(np.abs(alpha) > PIVOT_TOL)
        if nz.size:
            a = alpha[nz]
            bvar = basis[nz]
            xb = x[bvar]
            room = np.where(a > 0, (xb - lo[bvar]) / a, (hi[bvar] - xb) / -a)
            room = np.maximum(room, 0.0)
            best = room.min()
            if best < step:
                step = best
                tied = nz[room == best]
                leave = int(tied[np.argmin(basis[tied])])

        if step > 0.0:
            x[basis[nz]] -= step * alpha[nz]
            x[j] += direction * step
        if leave < 0:
            x[j] = hi[j] if direction > 0 else lo[j]
            flips += 1
            degenerate = 0
            continue

        out = int(basis[leave])
        x[out] = lo[out] if alpha[leave] > 0 else hi[out]
        _pivot(T, r, leave, q)
        basis[leave] = j
        nonbasic[q] = out
        pivots += 1

        degenerate = degenerate + 1 if step == 0.0 else 0
        if degenerate >= DEGENERATE_RUN:
            bland = True
    raise LPError("simplex iteration limit reached")


def _pivot(T: np.ndarray, r: np.ndarray, row: int, col: int) -> None:
    """Exchange basic variable ``row`` with nonbasic variable ``col`` in place."""
    p = T[row, col]
    prow = T[row] / p
    pcol = T[:, col].copy()
    pcol[row] = 0.0
    hit = np.flatnonzero(pcol)
    live = np.flatnonzero(prow)
    if hit.size and live.size:
        T[np.ix_(hit, live)] -= np.outer(pcol[hit], prow[live])
    T[hit, col] = -pcol[hit] / p
    T[row] = prow
    T[row, col] = 1.0 / p
    rc = r[col]
    r -= rc * prow
    r[col] = -rc / p
