"""Summand laws: integer lattices, gridded compact densities and mixtures."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import integrate

from .errors import NonFiniteError, ValidationError, ZeroVarianceError

RENORMALIZE_TOL = 1e-9
DEFAULT_GRID_INTERVALS = 4096
MIN_VARIANCE = 1e-14


@dataclass(frozen=True)
class LatticeDistribution:
    """Finitely supported law on the integers.

    Probabilities within 1e-9 of summing to one are renormalised; the support
    is kept as offsets from its smallest point so gcd computations do not
    depend on the location.
    """

    support: tuple[int, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        support = tuple(int(s) for s in self.support)
        if any(float(s) != float(orig) for s, orig in zip(support, self.support)):
            raise ValidationError("lattice support must be integers")
        probs = tuple(float(p) for p in self.probs)
        if len(support) != len(probs):
            raise ValidationError("support and probs must have equal length")
        if len(support) < 2:
            raise ValidationError("need at least two support points")
        if any(b <= a for a, b in zip(support, support[1:])):
            raise ValidationError("support must be strictly increasing")
        if any(not (0.0 < p <= 1.0) for p in probs):
            raise ValidationError("probabilities must lie in (0, 1]")
        total = math.fsum(probs)
        if abs(total - 1.0) > RENORMALIZE_TOL:
            raise ValidationError(f"probabilities sum to {total!r}, not 1")
        probs = tuple(p / total for p in probs)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def bernoulli(cls, p: float) -> "LatticeDistribution":
        return cls((0, 1), (1.0 - p, p))

    @classmethod
    def uniform(cls, support) -> "LatticeDistribution":
        support = tuple(support)
        return cls(support, (1.0 / len(support),) * len(support))

    @property
    def base(self) -> int:
        return self.support[0]

    @property
    def offsets(self) -> tuple[int, ...]:
        return tuple(s - self.base for s in self.support)

    @property
    def span(self) -> int:
        return self.support[-1] - self.support[0]

    def dense_pmf(self) -> np.ndarray:
        """Probabilities on base, base+1, ..., base+span (zeros at gaps)."""
        out = np.zeros(self.span + 1)
        out[list(self.offsets)] = self.probs
        return out

    def shifted(self, c: int) -> "LatticeDistribution":
        return LatticeDistribution(tuple(s + c for s in self.support), self.probs)


@dataclass(frozen=True, eq=False)
class GridDensity:
    """Compactly supported density sampled at N+1 equispaced nodes on [lo, hi].

    Integrals use composite Simpson weights, so N must be even.
    """

    lo: float
    hi: float
    values: np.ndarray
    bounded_away: bool = False

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if not self.hi > self.lo:
            raise ValidationError("need lo < hi")
        if values.ndim != 1 or values.size < 3 or (values.size - 1) % 2:
            raise ValidationError("need an even number N >= 2 of grid intervals")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise ValidationError("density values must be finite and non-negative")
        mass = self.integrate(values)
        if abs(mass - 1.0) > RENORMALIZE_TOL:
            raise ValidationError(f"density integrates to {mass!r}, not 1")
        if self.bounded_away and np.any(values[1:-1] <= 0):
            raise ValidationError("density flagged bounded away from 0 vanishes inside (lo, hi)")

    @classmethod
    def from_function(cls, fn, lo: float, hi: float, intervals: int = DEFAULT_GRID_INTERVALS, *,
                      bounded_away: bool = False) -> "GridDensity":
        """Sample ``fn`` and normalise it to unit mass."""
        x = np.linspace(lo, hi, intervals + 1)
        vals = np.asarray(fn(x), dtype=float) * np.ones_like(x)
        mass = integrate.simpson(vals, x=x)
        if not mass > 0:
            raise ValidationError("density has no mass on the grid")
        return cls(lo, hi, vals / mass, bounded_away)

    @cached_property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.values.size)

    @property
    def spacing(self) -> float:
        return (self.hi - self.lo) / (self.values.size - 1)

    @cached_property
    def weights(self) -> np.ndarray:
        """Composite Simpson weights for the grid."""
        n = self.values.size
        w = np.ones(n)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        return w * self.spacing / 3.0

    def integrate(self, samples) -> float:
        return float(np.dot(self.weights, samples))

    def expect(self, samples) -> float:
        """E g(X) given g sampled at the nodes."""
        return self.integrate(np.asarray(samples) * self.values)


@dataclass(frozen=True, eq=False)
class TwoPartMixture:
    """With probability ``weight_p`` a draw from ``continuous``, else from ``atomic``."""

    weight_p: float
    continuous: GridDensity
    atomic: LatticeDistribution | None = None

    def __post_init__(self):
        if not 0.0 < self.weight_p <= 1.0:
            raise ValidationError("weight_p must lie in (0, 1]")
        if self.weight_p < 1.0 and self.atomic is None:
            raise ValidationError("an atomic part is required when weight_p < 1")


@dataclass(frozen=True)
class GaussianMixturePair:
    """p N(mu1, var1) + (1 - p) N(mu2, var2)."""

    weight_p: float
    mu1: float
    var1: float
    mu2: float
    var2: float

    def __post_init__(self):
        if not 0.0 <= self.weight_p <= 1.0:
            raise ValidationError("weight_p must lie in [0, 1]")
        if not (self.var1 > 0 and self.var2 > 0):
            raise ValidationError("component variances must be positive")

    @property
    def mean(self) -> float:
        p = self.weight_p
        return p * self.mu1 + (1 - p) * self.mu2

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        p = self.weight_p
        return p * _normal_pdf(x, self.mu1, self.var1) + (1 - p) * _normal_pdf(x, self.mu2, self.var2)


def _normal_pdf(x, mu, var):
    return np.exp(-0.5 * (x - mu) ** 2 / var) / math.sqrt(2 * math.pi * var)


@dataclass(frozen=True)
class MomentSummary:
    mean: float
    variance: float
    skewness: float
    kurtosis: float
    abs_third: float | None = None  # E|X - mean|^3 / sigma^3

    @property
    def sigma(self) -> float:
        return math.sqrt(self.variance)


@dataclass(frozen=True)
class ExponentialSummands:
    """Exp(1) summands; the standardized sum has an exact gamma CDF."""

    @property
    def skewness(self) -> float:
        return 2.0


Distribution = LatticeDistribution | GridDensity | TwoPartMixture | GaussianMixturePair | ExponentialSummands


def _raw_moments(dist) -> list[float]:
    """[E X, E X^2, E X^3, E X^4]."""
    if isinstance(dist, LatticeDistribution):
        return [math.fsum(p * s**k for s, p in zip(dist.support, dist.probs)) for k in range(1, 5)]
    if isinstance(dist, GridDensity):
        x = dist.nodes
        return [dist.expect(x**k) for k in range(1, 5)]
    if isinstance(dist, GaussianMixturePair):
        def normal_raw(mu, v):
            return [mu, mu**2 + v, mu**3 + 3 * mu * v, mu**4 + 6 * mu**2 * v + 3 * v**2]
        p = dist.weight_p
        a = normal_raw(dist.mu1, dist.var1)
        b = normal_raw(dist.mu2, dist.var2)
        return [p * u + (1 - p) * v for u, v in zip(a, b)]
    if isinstance(dist, TwoPartMixture):
        cont = _raw_moments(dist.continuous)
        if dist.atomic is None:
            return cont
        atom = _raw_moments(dist.atomic)
        p = dist.weight_p
        return [p * u + (1 - p) * v for u, v in zip(cont, atom)]
    if isinstance(dist, ExponentialSummands):
        return [1.0, 2.0, 6.0, 24.0]
    raise TypeError(f"unsupported distribution {type(dist).__name__}")


def _abs_third(dist, mean: float) -> float:
    if isinstance(dist, LatticeDistribution):
        return math.fsum(p * abs(s - mean) ** 3 for s, p in zip(dist.support, dist.probs))
    if isinstance(dist, GridDensity):
        return dist.expect(np.abs(dist.nodes - mean) ** 3)
    if isinstance(dist, TwoPartMixture):
        total = dist.weight_p * _abs_third(dist.continuous, mean)
        if dist.atomic is not None:
            total += (1 - dist.weight_p) * _abs_third(dist.atomic, mean)
        return total
    if isinstance(dist, GaussianMixturePair):
        p = dist.weight_p
        return p * _normal_abs_third(dist.mu1 - mean, dist.var1) + (1 - p) * _normal_abs_third(dist.mu2 - mean, dist.var2)
    if isinstance(dist, ExponentialSummands):
        return 12.0 / math.e - 2.0
    raise TypeError(f"unsupported distribution {type(dist).__name__}")


def _normal_abs_third(shift: float, var: float) -> float:
    """E|Y|^3 for Y ~ N(shift, var), splitting at zero with truncated moments."""
    from .gaussian import truncated_moments

    s = math.sqrt(var)
    cut = -shift / s  # Y > 0  <=>  Z > cut
    upper = truncated_moments(cut, math.inf, 3)
    lower = truncated_moments(-math.inf, cut, 3)
    coef = [shift**3, 3 * shift**2 * s, 3 * shift * s**2, s**3]  # (shift + s z)^3
    return float(np.dot(coef, upper) - np.dot(coef, lower))


def compute_moments(dist) -> MomentSummary:
    """Mean, variance, skewness and standardized fourth moment of ``dist``."""
    m1, m2, m3, m4 = _raw_moments(dist)
    if isinstance(dist, LatticeDistribution):
        # central sums directly, to avoid cancellation for far-shifted supports
        c = [math.fsum(p * (s - m1) ** k for s, p in zip(dist.support, dist.probs)) for k in (2, 3, 4)]
        var, c3, c4 = c
    else:
        var = m2 - m1**2
        c3 = m3 - 3 * m1 * m2 + 2 * m1**3
        c4 = m4 - 4 * m1 * m3 + 6 * m1**2 * m2 - 3 * m1**4
    if not all(math.isfinite(v) for v in (m1, var, c3, c4)):
        raise NonFiniteError("a moment is not finite")
    if var < MIN_VARIANCE:
        raise ZeroVarianceError(f"variance {var!r} is numerically zero")
    sigma = math.sqrt(var)
    return MomentSummary(
        mean=m1,
        variance=var,
        skewness=c3 / sigma**3,
        kurtosis=c4 / var**2,
        abs_third=_abs_third(dist, m1) / sigma**3,
    )


def standardize_params(m: MomentSummary, n: int) -> tuple[float, float]:
    """(shift, scale) with W = (S_n - shift) / scale standardized."""
    if n < 1:
        raise ValidationError("n must be a positive integer")
    if m.variance < MIN_VARIANCE:
        raise ZeroVarianceError("variance is numerically zero")
    return n * m.mean, m.sigma * math.sqrt(n)


# analytic presets --------------------------------------------------------

def preset_density(name: str, lo: float | None = None, hi: float | None = None,
                   intervals: int = DEFAULT_GRID_INTERVALS, rate: float = 1.0) -> GridDensity:
    """Expand a named analytic density onto a grid.

    ``uniform`` and ``triangular`` default to the unit-variance interval
    centred at 0; ``truncated-exponential`` defaults to [0, 20].
    """
    if name == "uniform":
        lo = -math.sqrt(3) if lo is None else lo
        hi = math.sqrt(3) if hi is None else hi
        return GridDensity.from_function(lambda x: np.ones_like(x), lo, hi, intervals, bounded_away=True)
    if name == "triangular":
        lo = -math.sqrt(6) if lo is None else lo
        hi = math.sqrt(6) if hi is None else hi
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        return GridDensity.from_function(lambda x: np.maximum(half - np.abs(x - mid), 0.0), lo, hi, intervals)
    if name == "truncated-exponential":
        lo = 0.0 if lo is None else lo
        hi = 20.0 if hi is None else hi
        return GridDensity.from_function(lambda x: np.exp(-rate * (x - lo)), lo, hi, intervals, bounded_away=True)
    raise ValidationError(f"unknown density preset {name!r}")
