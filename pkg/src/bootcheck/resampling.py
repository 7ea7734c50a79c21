"""Bootstrap weight vectors and the resampled datasets they induce."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr, ndtri

from .rand_streams import Stream


class Scheme(str, enum.Enum):
    MULTINOMIAL = "Multinomial"
    MULTIPLIER_GAUSSIAN = "MultiplierGaussian"
    MULTIPLIER_RADEMACHER = "MultiplierRademacher"
    DIRICHLET = "Dirichlet"
    BLOCK = "Block"
    PARAMETRIC_UNIFORM = "ParametricUniform"

    @classmethod
    def parse(cls, value) -> "Scheme":
        if isinstance(value, Scheme):
            return value
        for member in cls:
            if member.value.lower() == str(value).lower():
                return member
        raise UnsupportedSchemeError(f"unsupported resampling scheme: {value!r}")


MULTIPLIER_SCHEMES = (Scheme.MULTIPLIER_GAUSSIAN, Scheme.MULTIPLIER_RADEMACHER)


class UnsupportedSchemeError(ValueError):
    pass


class SchemeMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class WeightVector:
    """One realization of bootstrap randomness.

    For ``Block`` the values are the length-``n`` vector of source indices
    read off the circular blocks; the block starts are kept in ``starts``.
    """

    scheme: Scheme
    values: np.ndarray
    starts: np.ndarray | None = None

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class Sample:
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size < 1:
            raise ValueError("a sample needs at least one observation")
        if not np.all(np.isfinite(v)):
            raise ValueError("sample values must be finite")
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.size


def draw_weights(scheme, n: int, stream: Stream, block_length: int = 1) -> WeightVector:
    """Draw one weight vector of the given scheme from ``stream``."""
    scheme = Scheme.parse(scheme)
    if n < 1:
        raise ValueError("n must be >= 1")

    if scheme is Scheme.MULTINOMIAL:
        picks = stream.integers(n, n)
        counts = np.bincount(picks, minlength=n).astype(float)
        return WeightVector(scheme, counts)
    if scheme is Scheme.MULTIPLIER_GAUSSIAN:
        return WeightVector(scheme, stream.normal(n))
    if scheme is Scheme.MULTIPLIER_RADEMACHER:
        return WeightVector(scheme, stream.signs(n))
    if scheme is Scheme.DIRICHLET:
        e = stream.exponential(n)
        return WeightVector(scheme, e / e.sum())
    if scheme is Scheme.BLOCK:
        return _draw_blocks(n, block_length, stream)
    if scheme is Scheme.PARAMETRIC_UNIFORM:
        return WeightVector(scheme, stream.open_uniform(n))
    raise UnsupportedSchemeError(f"unsupported resampling scheme: {scheme!r}")


def _draw_blocks(n: int, block_length: int, stream: Stream) -> WeightVector:
    if block_length < 1:
        raise ValueError("block_length must be >= 1")
    n_blocks = math.ceil(n / block_length)
    starts = stream.integers(n, n_blocks)
    offsets = np.arange(block_length)
    idx = ((starts[:, None] + offsets[None, :]) % n).ravel()[:n]
    return WeightVector(Scheme.BLOCK, idx.astype(float), starts=starts)


def resample_empirical(x: Sample, w: WeightVector) -> Sample:
    """Expand multinomial counts into the bootstrap sample.

    Observation ``j`` appears ``w[j]`` times; output keeps ascending original
    index order.
    """
    if w.scheme is not Scheme.MULTINOMIAL:
        raise SchemeMismatchError(f"expected Multinomial weights, got {w.scheme.value}")
    if len(w) != x.n:
        raise SchemeMismatchError("weight vector and sample differ in length")
    counts = w.values.astype(np.int64)
    return Sample(np.repeat(x.values, counts), dict(x.meta))


def resample_block(x: Sample, w: WeightVector) -> Sample:
    if w.scheme is not Scheme.BLOCK:
        raise SchemeMismatchError(f"expected Block weights, got {w.scheme.value}")
    if len(w) != x.n:
        raise SchemeMismatchError("weight vector and sample differ in length")
    return Sample(x.values[w.values.astype(np.int64)], dict(x.meta))


class Family(str, enum.Enum):
    NORMAL = "normal"
    EXPONENTIAL = "exponential"

    @classmethod
    def parse(cls, value) -> "Family":
        if isinstance(value, Family):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown parametric family: {value!r}") from None


def check_theta(family: Family, theta) -> tuple[float, ...]:
    theta = tuple(float(t) for t in np.atleast_1d(theta))
    if family is Family.NORMAL:
        if len(theta) != 2 or not theta[1] > 0 or not math.isfinite(theta[0]):
            raise ValueError(f"Normal family needs (mu, sigma > 0), got {theta}")
    elif family is Family.EXPONENTIAL:
        if len(theta) != 1 or not theta[0] > 0 or not math.isfinite(theta[0]):
            raise ValueError(f"Exponential family needs (rate > 0,), got {theta}")
    return theta


def family_quantile(family, theta, u):
    family = Family.parse(family)
    theta = check_theta(family, theta)
    u = np.asarray(u, dtype=float)
    if family is Family.NORMAL:
        return theta[0] + theta[1] * ndtri(u)
    return -np.log1p(-u) / theta[0]


def family_cdf(family, theta, t):
    family = Family.parse(family)
    theta = check_theta(family, theta)
    t = np.asarray(t, dtype=float)
    if family is Family.NORMAL:
        return ndtr((t - theta[0]) / theta[1])
    return -np.expm1(-theta[0] * np.maximum(t, 0.0))


def fit_family(family, values) -> tuple[float, ...]:
    """Maximum-likelihood estimate of the family parameters."""
    family = Family.parse(family)
    v = np.asarray(values, dtype=float)
    if family is Family.NORMAL:
        mu = float(v.mean())
        sigma = float(np.sqrt(np.mean((v - mu) ** 2)))
        return (mu, sigma)
    return (1.0 / float(v.mean()),)


def resample_parametric(theta_hat, w: WeightVector, family) -> Sample:
    """Apply the fitted quantile function component-wise to uniform weights."""
    if w.scheme is not Scheme.PARAMETRIC_UNIFORM:
        raise SchemeMismatchError(f"expected ParametricUniform weights, got {w.scheme.value}")
    return Sample(family_quantile(family, theta_hat, w.values))
