"""Scenario catalogue: statistics S_n and their bootstrap replicates.

All replicate computations are vectorized over a weight matrix of shape
``(M, n)`` whose rows are independent weight vectors; the single-replicate
entry point simply wraps one row.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps
from scipy.special import ndtr, ndtri

from .rand_streams import Stream, StreamKey, derive_stream
from .resampling import (
    MULTIPLIER_SCHEMES,
    Family,
    Sample,
    Scheme,
    WeightVector,
    check_theta,
    draw_weights,
    family_cdf,
    fit_family,
)


class ScenarioId(str, enum.Enum):
    MEAN_ROOT = "MeanRoot"
    KS_PARAMETRIC_GOF = "KSParametricGoF"
    GRID_PROCESS = "GridProcess"
    UNIFORM_MAX = "UniformMax"

    @classmethod
    def parse(cls, value) -> "ScenarioId":
        if isinstance(value, ScenarioId):
            return value
        for member in cls:
            if member.value.lower() == str(value).lower():
                return member
        raise ValueError(f"unknown scenario id: {value!r}")


class IncompatibleSchemeError(ValueError):
    pass


COMPATIBLE_SCHEMES = {
    ScenarioId.MEAN_ROOT: (
        Scheme.MULTINOMIAL,
        Scheme.MULTIPLIER_GAUSSIAN,
        Scheme.MULTIPLIER_RADEMACHER,
        Scheme.DIRICHLET,
        Scheme.BLOCK,
    ),
    ScenarioId.GRID_PROCESS: (
        Scheme.MULTINOMIAL,
        Scheme.MULTIPLIER_GAUSSIAN,
        Scheme.MULTIPLIER_RADEMACHER,
        Scheme.DIRICHLET,
        Scheme.BLOCK,
    ),
    ScenarioId.KS_PARAMETRIC_GOF: (Scheme.PARAMETRIC_UNIFORM,),
    ScenarioId.UNIFORM_MAX: (Scheme.MULTINOMIAL, Scheme.BLOCK),
}

DATA_FAMILIES = ("normal", "exponential", "uniform", "point")


@dataclass(frozen=True)
class DataLaw:
    """Law of one observation.

    ``normal``: N(loc, scale^2); ``exponential``: loc + Exp(mean=scale);
    ``uniform``: U(loc, loc + scale); ``point``: unit mass at loc.
    """

    family: str = "normal"
    loc: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        if self.family not in DATA_FAMILIES:
            raise ValueError(f"unknown data law family: {self.family!r}")
        if not (math.isfinite(self.loc) and math.isfinite(self.scale)):
            raise ValueError("data law parameters must be finite")
        if self.family != "point" and not self.scale > 0:
            raise ValueError("data law scale must be positive")

    @property
    def mean(self) -> float:
        if self.family == "exponential":
            return self.loc + self.scale
        if self.family == "uniform":
            return self.loc + 0.5 * self.scale
        return self.loc

    @property
    def variance(self) -> float:
        if self.family in ("normal", "exponential"):
            return self.scale**2
        if self.family == "uniform":
            return self.scale**2 / 12.0
        return 0.0

    def draw(self, stream: Stream, size: int) -> np.ndarray:
        if self.family == "normal":
            return self.loc + self.scale * stream.normal(size)
        if self.family == "exponential":
            return self.loc + self.scale * stream.exponential(size)
        if self.family == "uniform":
            return self.loc + self.scale * stream.uniform(size)
        stream.words(size)  # keep consumption identical across families
        return np.full(size, self.loc)

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        if self.family == "normal":
            return ndtr((t - self.loc) / self.scale)
        if self.family == "exponential":
            return -np.expm1(-np.maximum(t - self.loc, 0.0) / self.scale)
        if self.family == "uniform":
            return np.clip((t - self.loc) / self.scale, 0.0, 1.0)
        return (t >= self.loc).astype(float)


@dataclass(frozen=True)
class Scenario:
    id: ScenarioId
    data_law: DataLaw = field(default_factory=DataLaw)
    mu0: float | None = None
    grid: tuple[float, ...] = ()
    gof_family: str = "normal"
    estimate: bool = True
    theta: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "id", ScenarioId.parse(self.id))
        object.__setattr__(self, "grid", tuple(float(g) for g in self.grid))
        if self.id is ScenarioId.GRID_PROCESS:
            if not self.grid:
                raise ValueError("GridProcess needs at least one grid point")
            if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
                raise ValueError("grid points must be strictly increasing")
        if self.id is ScenarioId.KS_PARAMETRIC_GOF:
            Family.parse(self.gof_family)
        if self.id is ScenarioId.UNIFORM_MAX:
            if not self.theta > 0:
                raise ValueError("UniformMax needs theta > 0")

    @property
    def hypothesized_mean(self) -> float:
        return self.data_law.mean if self.mu0 is None else float(self.mu0)

    def null_theta(self) -> tuple[float, ...]:
        """Parameter of the GoF family matching the data law (known-parameter mode)."""
        fam = Family.parse(self.gof_family)
        if fam is Family.NORMAL:
            return check_theta(fam, (self.data_law.loc, self.data_law.scale))
        return check_theta(fam, (1.0 / self.data_law.scale,))


def mean_root(mu0: float = 0.0, loc: float = 0.0, scale: float = 1.0, family="normal") -> Scenario:
    return Scenario(ScenarioId.MEAN_ROOT, DataLaw(family, loc, scale), mu0=mu0)


def uniform_max(theta: float = 1.0) -> Scenario:
    return Scenario(ScenarioId.UNIFORM_MAX, DataLaw("uniform", 0.0, theta), theta=theta)


def ks_gof(family="normal", loc=0.0, scale=1.0, estimate=True) -> Scenario:
    return Scenario(
        ScenarioId.KS_PARAMETRIC_GOF,
        DataLaw(family, loc, scale),
        gof_family=family,
        estimate=estimate,
    )


def grid_process(grid, family="normal", loc=0.0, scale=1.0) -> Scenario:
    return Scenario(ScenarioId.GRID_PROCESS, DataLaw(family, loc, scale), grid=tuple(grid))


@dataclass(frozen=True)
class ReplicateSet:
    s_n: float
    replicates: np.ndarray
    n: int

    def __post_init__(self):
        r = np.asarray(self.replicates, dtype=float).ravel()
        if r.size < 1:
            raise ValueError("a replicate set needs M >= 1")
        if not (np.all(np.isfinite(r)) and math.isfinite(self.s_n)):
            raise ValueError("replicate values must be finite")
        object.__setattr__(self, "replicates", r)

    @property
    def m(self) -> int:
        return self.replicates.size


def check_compatible(scn: Scenario, scheme) -> Scheme:
    scheme = Scheme.parse(scheme)
    if scheme not in COMPATIBLE_SCHEMES[scn.id]:
        raise IncompatibleSchemeError(
            f"scheme {scheme.value} is not compatible with scenario {scn.id.value}"
        )
    return scheme


def draw_sample(scn: Scenario, n: int, stream: Stream) -> Sample:
    return Sample(scn.data_law.draw(stream, n), {"scenario": scn.id.value})


def _values(x) -> np.ndarray:
    v = x.values if isinstance(x, Sample) else np.asarray(x, dtype=float)
    if v.size == 0:
        raise ValueError("empty sample")
    return v


def _ks_sup_rows(sorted_rows: np.ndarray, cdf_rows: np.ndarray) -> np.ndarray:
    # sup_t |ecdf - G| is attained at an order statistic, on one side of the jump
    n = sorted_rows.shape[-1]
    i = np.arange(1, n + 1)
    upper = i / n - cdf_rows
    lower = cdf_rows - (i - 1) / n
    return np.maximum(upper.max(axis=-1), lower.max(axis=-1))


def _fit_rows(family: Family, rows: np.ndarray) -> list[np.ndarray]:
    if family is Family.NORMAL:
        mu = rows.mean(axis=-1)
        sigma = np.sqrt(np.mean((rows - mu[..., None]) ** 2, axis=-1))
        return [mu, sigma]
    return [1.0 / rows.mean(axis=-1)]


def _cdf_rows(family: Family, params: list[np.ndarray], rows: np.ndarray) -> np.ndarray:
    if family is Family.NORMAL:
        mu, sigma = params
        return ndtr((rows - mu[..., None]) / sigma[..., None])
    (rate,) = params
    return -np.expm1(-rate[..., None] * np.maximum(rows, 0.0))


def ks_gof_rows(scn: Scenario, rows: np.ndarray) -> np.ndarray:
    """sqrt(n) * sup |ecdf - G_theta_hat| for each row of ``rows``."""
    fam = Family.parse(scn.gof_family)
    rows = np.sort(np.atleast_2d(rows), axis=-1)
    n = rows.shape[-1]
    if scn.estimate:
        params = _fit_rows(fam, rows)
    else:
        params = [np.full(rows.shape[0], p) for p in scn.null_theta()]
    return math.sqrt(n) * _ks_sup_rows(rows, _cdf_rows(fam, params, rows))


def compute_statistic(scn: Scenario, x) -> float:
    v = _values(x)
    n = v.size
    if scn.id is ScenarioId.MEAN_ROOT:
        return math.sqrt(n) * (float(v.mean()) - scn.hypothesized_mean)
    if scn.id is ScenarioId.KS_PARAMETRIC_GOF:
        return float(ks_gof_rows(scn, v[None, :])[0])
    if scn.id is ScenarioId.GRID_PROCESS:
        return float(np.max(np.abs(grid_path(scn, v))))
    if scn.id is ScenarioId.UNIFORM_MAX:
        return n * (scn.theta - float(v.max()))
    raise ValueError(f"unknown scenario {scn.id!r}")


def statistic_rows(scn: Scenario, rows: np.ndarray) -> np.ndarray:
    """compute_statistic applied to each row of an ``(R, n)`` data matrix."""
    rows = np.atleast_2d(rows)
    n = rows.shape[1]
    if scn.id is ScenarioId.MEAN_ROOT:
        return math.sqrt(n) * (rows.mean(axis=1) - scn.hypothesized_mean)
    if scn.id is ScenarioId.KS_PARAMETRIC_GOF:
        return ks_gof_rows(scn, rows)
    if scn.id is ScenarioId.GRID_PROCESS:
        t = np.asarray(scn.grid)
        ecdf = (rows[:, :, None] <= t[None, None, :]).mean(axis=1)
        return math.sqrt(n) * np.max(np.abs(ecdf - scn.data_law.cdf(t)), axis=1)
    if scn.id is ScenarioId.UNIFORM_MAX:
        return n * (scn.theta - rows.max(axis=1))
    raise ValueError(f"unknown scenario {scn.id!r}")


def grid_path(scn: Scenario, x) -> np.ndarray:
    """Signed process values sqrt(n) * (G_n(t_k) - G(t_k)) on the grid."""
    v = _values(x)
    t = np.asarray(scn.grid)
    ecdf = (v[:, None] <= t[None, :]).mean(axis=0)
    return math.sqrt(v.size) * (ecdf - scn.data_law.cdf(t))


def stack_weights(weights: list[WeightVector]) -> np.ndarray:
    return np.vstack([w.values for w in weights])


def grid_replicate_paths(scn: Scenario, x, scheme, weights: np.ndarray) -> np.ndarray:
    """Signed replicate process values on the grid, one row per weight vector.

    Empirical-type schemes give sqrt(n) * (G*_n(t_k) - G_n(t_k)); multiplier
    schemes give n^{-1/2} sum_j (w_j - mean w) 1{x_j <= t_k}.
    """
    scheme = Scheme.parse(scheme)
    v = _values(x)
    n = v.size
    W = np.atleast_2d(weights)
    t = np.asarray(scn.grid)
    ind = (v[:, None] <= t[None, :]).astype(float)  # (n, K)
    g_n = ind.mean(axis=0)
    if scheme is Scheme.MULTINOMIAL:
        return math.sqrt(n) * (W @ ind / n - g_n)
    if scheme in MULTIPLIER_SCHEMES:
        centered = W - W.mean(axis=1, keepdims=True)
        return centered @ ind / math.sqrt(n)
    if scheme is Scheme.DIRICHLET:
        return math.sqrt(n) * (W @ ind - g_n)
    if scheme is Scheme.BLOCK:
        idx = W.astype(np.int64)
        return math.sqrt(n) * (ind[idx].mean(axis=1) - g_n)
    raise IncompatibleSchemeError(f"scheme {scheme.value} unsupported for GridProcess")


def compute_replicates(scn: Scenario, x, scheme, weights: np.ndarray) -> np.ndarray:
    """Replicate values S_n^(i), one per row of ``weights``."""
    scheme = check_compatible(scn, scheme)
    v = _values(x)
    n = v.size
    W = np.atleast_2d(np.asarray(weights, dtype=float))
    if W.shape[1] != n:
        raise ValueError("weight vectors and sample differ in length")
    xbar = float(v.mean())

    if scn.id is ScenarioId.MEAN_ROOT:
        if scheme is Scheme.MULTINOMIAL:
            # counts minus one sum to zero, so a common shift of x cancels
            return math.sqrt(n) * ((W - 1.0) @ v / n)
        if scheme in MULTIPLIER_SCHEMES:
            centered = W - W.mean(axis=1, keepdims=True)
            return centered @ (v - xbar) / math.sqrt(n)
        if scheme is Scheme.DIRICHLET:
            return math.sqrt(n) * (W @ v - xbar)
        if scheme is Scheme.BLOCK:
            return math.sqrt(n) * (v[W.astype(np.int64)].mean(axis=1) - xbar)

    if scn.id is ScenarioId.GRID_PROCESS:
        return np.max(np.abs(grid_replicate_paths(scn, v, scheme, W)), axis=1)

    if scn.id is ScenarioId.KS_PARAMETRIC_GOF:
        fam = Family.parse(scn.gof_family)
        theta_hat = fit_family(fam, v) if scn.estimate else scn.null_theta()
        check_theta(fam, theta_hat)
        if fam is Family.NORMAL:
            boot = theta_hat[0] + theta_hat[1] * ndtri(W)
        else:
            boot = -np.log1p(-W) / theta_hat[0]
        return ks_gof_rows(scn, boot)

    if scn.id is ScenarioId.UNIFORM_MAX:
        top = float(v.max())
        if scheme is Scheme.MULTINOMIAL:
            boot_max = np.where(W > 0, v[None, :], -np.inf).max(axis=1)
        else:
            boot_max = v[W.astype(np.int64)].max(axis=1)
        return n * (top - boot_max)

    raise IncompatibleSchemeError(f"{scheme.value} unsupported for {scn.id.value}")


def compute_replicate(scn: Scenario, x, w: WeightVector) -> float:
    return float(compute_replicates(scn, x, w.scheme, w.values[None, :])[0])


def draw_weight_matrix(
    scheme, n: int, m: int, seed: int, epoch: int, block_length: int = 1, first: int = 1
) -> np.ndarray:
    """Stack ``m`` weight vectors drawn on coordinates ``first .. first+m-1``."""
    rows = [
        draw_weights(scheme, n, derive_stream(StreamKey(seed, first + i, epoch)), block_length).values
        for i in range(m)
    ]
    return np.vstack(rows)


def replicate_set(
    scn: Scenario,
    scheme,
    x,
    m: int,
    seed: int,
    epoch: int,
    block_length: int = 1,
) -> ReplicateSet:
    """S_n plus M replicates; replicate ``i`` uses stream coordinate ``i``."""
    check_compatible(scn, scheme)
    v = _values(x)
    W = draw_weight_matrix(scheme, v.size, m, seed, epoch, block_length)
    reps = compute_replicates(scn, v, scheme, W)
    return ReplicateSet(compute_statistic(scn, v), reps, v.size)


def limit_law(scn: Scenario):
    """Closed-form weak limit of S_n as a frozen scipy distribution, if known."""
    if scn.id is ScenarioId.MEAN_ROOT:
        sd = math.sqrt(scn.data_law.variance)
        return sps.norm(0.0, sd) if sd > 0 else None
    if scn.id is ScenarioId.UNIFORM_MAX:
        return sps.expon(scale=scn.theta)
    return None


def grid_limit_rows(scn: Scenario, stream: Stream, size: int) -> np.ndarray:
    """Draws of max_k |B(G(t_k))| for a Brownian bridge B (the fidi limit)."""
    u = scn.data_law.cdf(np.asarray(scn.grid))
    cov = np.minimum.outer(u, u) - np.outer(u, u)
    vals, vecs = np.linalg.eigh(cov)
    root = vecs * np.sqrt(np.clip(vals, 0.0, None))
    z = stream.normal(size * len(u)).reshape(size, len(u))
    return np.max(np.abs(z @ root.T), axis=1)
