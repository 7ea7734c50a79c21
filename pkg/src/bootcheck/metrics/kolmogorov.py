"""Kolmogorov distances between finitely supported measures.

The discrete-discrete distance is computed in exact rational arithmetic: every
float probability is a dyadic rational, so scaling by a common power of two
turns all d.f. values into Python integers.  The result is the correctly
rounded value of the exact supremum, independent of summation order.
"""
from __future__ import annotations

import numpy as np

from .measures import DimensionMismatchError, DiscreteMeasure, union_support

MARGINAL_TOL = 1e-10


class MarginalMismatchError(ValueError):
    pass


def _dyadic_integers(probs: np.ndarray) -> tuple[list[int], int]:
    """Integers k_i and shift s with probs[i] == k_i / 2**s exactly."""
    mant, expo = np.frexp(probs)
    # probs[i] = mant[i] * 2**expo[i], mant in [0.5, 1): mant * 2**53 is an integer
    mant_int = (mant * 9007199254740992.0).astype(np.int64)
    low = int(expo.min()) - 53
    return [int(m) << int(e - 53 - low) for m, e in zip(mant_int, expo)], -low


def _exact_ratio(num: int, shift: int) -> float:
    if shift >= 0:
        return num / (1 << shift)
    return float(num << -shift)


def _sup_1d(pp: np.ndarray, qq: np.ndarray) -> float:
    ints, shift = _dyadic_integers(np.concatenate([pp, qq]))
    m = pp.size
    best = 0
    acc = 0
    for a, b in zip(ints[:m], ints[m:]):
        acc += a - b
        if abs(acc) > best:
            best = abs(acc)
    return _exact_ratio(best, shift)


def _grid_2d(pts: np.ndarray, diff_ints: list[int]):
    xs, ix = np.unique(pts[:, 0], return_inverse=True)
    ys, iy = np.unique(pts[:, 1], return_inverse=True)
    grid = np.zeros((xs.size, ys.size), dtype=object)
    grid[:] = 0
    for i, j, d in zip(np.ravel(ix), np.ravel(iy), diff_ints):
        grid[i, j] += d
    return grid


def _sup_2d(pts: np.ndarray, pp: np.ndarray, qq: np.ndarray) -> float:
    ints, shift = _dyadic_integers(np.concatenate([pp, qq]))
    m = pp.size
    diff = [a - b for a, b in zip(ints[:m], ints[m:])]
    grid = _grid_2d(pts, diff)
    cum = np.cumsum(np.cumsum(grid, axis=0), axis=1)
    best = max(abs(v) for v in cum.ravel())
    return _exact_ratio(int(best), shift)


def kolmogorov_distance(p: DiscreteMeasure, q: DiscreteMeasure) -> float:
    """sup_x |P(-inf, x] - Q(-inf, x]| over R (d=1) or R^2 (d=2).

    Both measures are discrete, so the supremum is attained on the merged
    support (d=1) or on its coordinate grid (d=2).
    """
    pts, pp, qq = union_support(p, q)
    if p.dim == 1:
        return _sup_1d(pp, qq)
    return _sup_2d(pts, pp, qq)


def kolmogorov_distance_to_cdf(p: DiscreteMeasure, cdf) -> float:
    """Kolmogorov distance from a d=1 discrete measure to a continuous d.f."""
    if p.dim != 1:
        raise DimensionMismatchError("continuous reference is supported for d=1 only")
    order = np.argsort(p.support)
    x = p.support[order]
    # exact partial sums, each rounded once, so no drift accumulates along the support
    ints, shift = _dyadic_integers(p.probs[order])
    acc = 0
    upper = np.empty(x.size)
    for k, a in enumerate(ints):
        acc += a
        upper[k] = _exact_ratio(acc, shift)
    lower = np.concatenate([[0.0], upper[:-1]])
    g = np.asarray(cdf(x), dtype=float)
    return float(max(np.max(np.abs(upper - g)), np.max(np.abs(lower - g))))


def _law_on_grid(law, grid: np.ndarray):
    """(value at grid points, left limit at the next grid point) of a d.f.

    ``law`` is a d=1 DiscreteMeasure (step d.f.; the grid must contain its
    atoms) or a callable continuous d.f.
    """
    if isinstance(law, DiscreteMeasure):
        at = law.cdf(grid)
        return at, at
    at = np.asarray(law(grid), dtype=float)
    nxt = np.concatenate([at[1:], [1.0]])
    return at, nxt


def product_gap(joint: DiscreteMeasure, law_x, law_y) -> float:
    """sup over R^2 of |F_joint(x, y) - F_x(x) F_y(y)|.

    ``law_x``/``law_y`` are discrete measures or continuous d.f. callables.
    On each grid cell [x_i, x_{i+1}) x [y_j, y_{j+1}) the joint d.f. is
    constant and the product is monotone, so the two cell corners bound it.
    """
    if joint.dim != 2:
        raise DimensionMismatchError("joint measure must live on R^2")
    xs = joint.support[:, 0]
    ys = joint.support[:, 1]
    if isinstance(law_x, DiscreteMeasure):
        xs = np.concatenate([xs, law_x.support])
    if isinstance(law_y, DiscreteMeasure):
        ys = np.concatenate([ys, law_y.support])
    gx = np.unique(xs)
    gy = np.unique(ys)
    ix = np.searchsorted(gx, joint.support[:, 0])
    iy = np.searchsorted(gy, joint.support[:, 1])
    mass = np.zeros((gx.size + 1, gy.size + 1))
    np.add.at(mass, (ix + 1, iy + 1), joint.probs)
    fj = np.cumsum(np.cumsum(mass, axis=0), axis=1)  # row/col 0: below the grid
    ax, nx = _law_on_grid(law_x, gx)
    ay, ny = _law_on_grid(law_y, gy)
    ax = np.concatenate([[0.0], ax])
    ay = np.concatenate([[0.0], ay])
    nx = np.concatenate([[ax[1] if gx.size and not isinstance(law_x, DiscreteMeasure) else 0.0], nx])
    ny = np.concatenate([[ay[1] if gy.size and not isinstance(law_y, DiscreteMeasure) else 0.0], ny])
    lo = np.abs(fj - np.outer(ax, ay))
    hi = np.abs(fj - np.outer(nx, ny))
    return float(max(lo.max(), hi.max()))


def joint_product_gap(
    joint: DiscreteMeasure, marg_a: DiscreteMeasure, marg_b: DiscreteMeasure
) -> float:
    """Kolmogorov distance on R^2 between ``joint`` and ``marg_a`` x ``marg_b``.

    The supplied marginals must be the coordinate marginals of ``joint``.
    """
    for axis, marg in ((0, marg_a), (1, marg_b)):
        own = joint.marginal(axis)
        _, pa, pb = union_support(own, marg)
        if np.max(np.abs(pa - pb)) > MARGINAL_TOL:
            raise MarginalMismatchError(f"supplied marginal {axis} does not match the joint")
    return product_gap(joint, marg_a, marg_b)
