"""Ground truth at desk scale.

* exact pmf of a lattice sum by repeated dense convolution,
* the CDF of a standardized sum of Exp(1) variables via the regularized
  incomplete gamma function (series below a+1, continued fraction above),
* sup-deviation scans of the CLT and Edgeworth approximations,
* seeded Monte Carlo for laws without an exact oracle.

Monte Carlo streams: samples are drawn in blocks of ``MC_BLOCK``; block ``j``
uses ``numpy.random.Philox(key=seed).jumped(j)``.  Results therefore do not
depend on how blocks are distributed over workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import signal, special

from . import gaussian
from .distributions import (
    ExponentialSummands,
    GaussianMixturePair,
    GridDensity,
    LatticeDistribution,
    TwoPartMixture,
    compute_moments,
    standardize_params,
)
from .edgeworth import edgeworth_cdf_correction, snap_to_midpoint
from .errors import SupportTooLargeError, ValidationError
from .testfunctions import TestFunction

MAX_SUPPORT = 2**22
MC_BLOCK = 1 << 16
GAMMA_EPS = 1e-14
GAMMA_MAX_ITER = 100_000
EVAL_LIMIT = 6.0
GAMMA_GRID_STEP = 0.01


@dataclass(frozen=True, eq=False)
class PmfVector:
    """Dense pmf on offset, offset+1, ..., offset+len(probs)-1."""

    offset: int
    probs: np.ndarray

    @property
    def values(self) -> np.ndarray:
        return np.arange(self.probs.size) + self.offset

    def as_dict(self) -> dict[int, float]:
        return {int(k): float(p) for k, p in zip(self.values, self.probs)}


@dataclass(frozen=True)
class OracleResult:
    value: float
    method: str
    stderr: float = 0.0
    meta: dict = field(default_factory=dict)


def convolve_pmf(a: PmfVector, b: PmfVector, method: str = "direct") -> PmfVector:
    if method == "direct":
        probs = np.convolve(a.probs, b.probs)
    elif method == "fft":
        probs = np.clip(signal.fftconvolve(a.probs, b.probs), 0.0, None)
    else:
        raise ValidationError(f"unknown convolution method {method!r}")
    return PmfVector(a.offset + b.offset, probs)


def lattice_power_pmf(dist: LatticeDistribution, n: int, method: str = "direct") -> PmfVector:
    """Exact pmf of X_1 + ... + X_n by binary powering of the one-step pmf."""
    if n < 1:
        raise ValidationError("n must be a positive integer")
    if n * dist.span > MAX_SUPPORT:
        raise SupportTooLargeError(f"n * span = {n * dist.span} exceeds {MAX_SUPPORT}")
    step = PmfVector(dist.base, dist.dense_pmf())
    result = None
    k = n
    while k:
        if k & 1:
            result = step if result is None else convolve_pmf(result, step, method)
        k >>= 1
        if k:
            step = convolve_pmf(step, step, method)
    return result


def lattice_expectation(pmf: PmfVector, h: TestFunction, shift: float, scale: float) -> OracleResult:
    """E h((S - shift) / scale) under the exact pmf of S."""
    if not scale > 0:
        raise ValidationError("scale must be positive")
    w = (pmf.values - shift) / scale
    return OracleResult(math.fsum(pmf.probs * h(w)), "exact-convolution")


# incomplete gamma -----------------------------------------------------------

def _log1pmx(t: np.ndarray) -> np.ndarray:
    """log(1 + t) - t without cancellation near t = 0."""
    out = np.log1p(t) - t
    small = np.abs(t) < 0.25
    if small.any():
        ts = t[small]
        acc = np.zeros_like(ts)
        power = ts * ts
        for k in range(2, 60):
            acc += (1 if k % 2 else -1) * power / k
            power = power * ts
        out[small] = acc
    return out


def _log_prefactor(a: float, x: np.ndarray) -> np.ndarray:
    """log(x^a e^-x / Gamma(a)).

    For large shapes the Stirling form keeps the O(a) terms from cancelling.
    """
    if a < 20.0:
        return a * np.log(x) - x - special.gammaln(a)
    stirling = 1 / (12 * a) - 1 / (360 * a**3) + 1 / (1260 * a**5) - 1 / (1680 * a**7)
    t = (x - a) / a
    return a * _log1pmx(t) + 0.5 * math.log(a) - 0.5 * math.log(2 * math.pi) - stirling


def _gamma_series(a: float, x: np.ndarray) -> np.ndarray:
    """P(a, x) by the power series sum x^k / (a (a+1) ... (a+k))."""
    term = np.full_like(x, 1.0 / a)
    total = term.copy()
    active = np.ones(x.shape, dtype=bool)
    ap = a
    for _ in range(GAMMA_MAX_ITER):
        ap += 1.0
        term = np.where(active, term * x / ap, 0.0)
        total += term
        active &= np.abs(term) > np.abs(total) * GAMMA_EPS
        if not active.any():
            break
    return total * np.exp(_log_prefactor(a, x))


def _gamma_contfrac(a: float, x: np.ndarray) -> np.ndarray:
    """Q(a, x) by the Lentz continued fraction."""
    tiny = 1e-300
    b = x + 1.0 - a
    c = np.full_like(x, 1.0 / tiny)
    d = 1.0 / b
    h = d.copy()
    active = np.ones(x.shape, dtype=bool)
    for i in range(1, GAMMA_MAX_ITER):
        an = -i * (i - a)
        b = b + 2.0
        d = an * d + b
        d = np.where(np.abs(d) < tiny, tiny, d)
        c = b + an / c
        c = np.where(np.abs(c) < tiny, tiny, c)
        d = 1.0 / d
        delta = d * c
        h = np.where(active, h * delta, h)
        active &= np.abs(delta - 1.0) > GAMMA_EPS
        if not active.any():
            break
    return np.exp(_log_prefactor(a, x)) * h


def regularized_lower_gamma(a: float, x):
    """P(a, x) = gamma(a, x) / Gamma(a) for a > 0, elementwise in x (float for scalar x)."""
    if not a > 0:
        raise ValidationError("shape must be positive")
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros_like(x)
    pos = x > 0
    small = pos & (x < a + 1.0)
    large = pos & ~small
    if small.any():
        out[small] = _gamma_series(a, x[small])
    if large.any():
        out[large] = 1.0 - _gamma_contfrac(a, x[large])
    out = np.clip(out, 0.0, 1.0)
    return float(out[0]) if scalar else out


def gamma_sum_cdf_values(n: int, x) -> np.ndarray:
    """P((G_n - n) / sqrt(n) <= x) with G_n ~ Gamma(n, 1), elementwise."""
    if n < 1:
        raise ValidationError("n must be a positive integer")
    x = np.asarray(x, dtype=float)
    t = n + x * math.sqrt(n)
    return np.asarray(regularized_lower_gamma(float(n), np.atleast_1d(np.maximum(t, 0.0)))).reshape(x.shape)


def gamma_sum_cdf(n: int, x: float) -> OracleResult:
    return OracleResult(float(gamma_sum_cdf_values(n, np.array([x]))[0]), "gamma-closed-form")


# sup deviation ----------------------------------------------------------------

def lattice_midpoints(dist: LatticeDistribution, n: int, limit: float = EVAL_LIMIT):
    """(raw integer k, W-threshold) for all cell midpoints k + 1/2 mapped into [-limit, limit]."""
    m = compute_moments(dist)
    shift, scale = standardize_params(m, n)
    lo = math.ceil(shift - limit * scale - 0.5)
    hi = math.floor(shift + limit * scale - 0.5)
    k = np.arange(lo, hi + 1)
    return k, (k + 0.5 - shift) / scale


def sup_deviation(dist, n: int, correction: bool = True, xs=None) -> tuple[float, float]:
    """sup_x |P(W <= x) - Phi(x) - corr(x)| over the evaluation set, with its argmax.

    Lattice laws are evaluated at every cell midpoint of W in [-6, 6] (or at
    the midpoint-snapped versions of ``xs``); the exponential oracle on a 0.01
    grid over [-6, 6] (or ``xs``).
    """
    if isinstance(dist, LatticeDistribution):
        m = compute_moments(dist)
        shift, scale = standardize_params(m, n)
        pmf = lattice_power_pmf(dist, n)
        cdf = np.cumsum(pmf.probs)
        if xs is None:
            k, x = lattice_midpoints(dist, n)
        else:
            raw = np.array([snap_to_midpoint(v * scale + shift) for v in np.atleast_1d(xs)])
            k = (raw - 0.5).astype(int)
            x = (raw - shift) / scale
        idx = k - pmf.offset
        exact = np.where(idx < 0, 0.0, cdf[np.clip(idx, 0, cdf.size - 1)])
        exact = np.where(idx >= cdf.size, 1.0, exact)
        gamma = m.skewness
    elif isinstance(dist, ExponentialSummands):
        if xs is None:
            x = np.round(np.arange(-600, 601) * GAMMA_GRID_STEP, 12)
        else:
            x = np.asarray(xs, dtype=float)
        exact = gamma_sum_cdf_values(n, x)
        gamma = dist.skewness
    else:
        raise TypeError(f"no exact oracle for {type(dist).__name__}")
    if x.size == 0:
        raise ValidationError("empty evaluation set")
    approx = gaussian.cdf(x)
    if correction:
        approx = approx + edgeworth_cdf_correction(x, gamma, n)
    err = np.abs(exact - approx)
    i = int(np.argmax(err))
    return float(err[i]), float(x[i])


# Monte Carlo ------------------------------------------------------------------

def _grid_quantile(dens: GridDensity):
    """Inverse of the trapezoid CDF of a gridded density, linear between nodes."""
    x = dens.nodes
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (dens.values[1:] + dens.values[:-1]) * np.diff(x))])
    cum /= cum[-1]
    return lambda u: np.interp(u, cum, x)


def _sampler(dist):
    """Return draw(rng, size, n) -> array of ``size`` raw sums of n i.i.d. summands."""
    if isinstance(dist, LatticeDistribution):
        support = np.asarray(dist.support, dtype=float)
        probs = np.asarray(dist.probs)

        def draw(rng, size, n):
            return rng.multinomial(n, probs, size=size) @ support
        return draw
    if isinstance(dist, GridDensity):
        quantile = _grid_quantile(dist)

        def draw(rng, size, n):
            return quantile(rng.random((size, n))).sum(axis=1)
        return draw
    if isinstance(dist, TwoPartMixture):
        quantile = _grid_quantile(dist.continuous)

        def draw(rng, size, n):
            k = rng.binomial(n, dist.weight_p, size=size)
            vals = quantile(rng.random((size, n)))
            out = np.where(np.arange(n)[None, :] < k[:, None], vals, 0.0).sum(axis=1)
            if dist.atomic is not None:
                support = np.asarray(dist.atomic.support, dtype=float)
                out += rng.multinomial(n - k, np.asarray(dist.atomic.probs)) @ support
            return out
        return draw
    if isinstance(dist, GaussianMixturePair):
        def draw(rng, size, n):
            k = rng.binomial(n, dist.weight_p, size=size)
            z1 = rng.standard_normal(size)
            z2 = rng.standard_normal(size)
            return (k * dist.mu1 + np.sqrt(k * dist.var1) * z1
                    + (n - k) * dist.mu2 + np.sqrt((n - k) * dist.var2) * z2)
        return draw
    raise TypeError(f"cannot sample {type(dist).__name__}")


def simulate_standardized_sums(dist, n: int, samples: int, seed: int, workers: int = 1) -> np.ndarray:
    """Draw ``samples`` values of W = (S_n - n mu) / (sigma sqrt n), deterministic in ``seed``."""
    if samples < 1:
        raise ValidationError("samples must be at least 1")
    m = compute_moments(dist)
    shift, scale = standardize_params(m, n)
    draw = _sampler(dist)
    root = np.random.Philox(key=int(seed))
    sizes = [min(MC_BLOCK, samples - start) for start in range(0, samples, MC_BLOCK)]

    def block(j):
        rng = np.random.Generator(root.jumped(j))
        return (draw(rng, sizes[j], n) - shift) / scale

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(block, range(len(sizes))))
    else:
        parts = [block(j) for j in range(len(sizes))]
    return np.concatenate(parts)


def monte_carlo_expectation(dist, n: int, h: TestFunction, samples: int, seed: int, workers: int = 1) -> OracleResult:
    """Mean of h(W) over simulated standardized sums, with its standard error."""
    if samples < 1:
        raise ValidationError("samples must be at least 1")
    meta = {"seed": int(seed), "samples": int(samples), "block": MC_BLOCK, "generator": "philox-jumped"}
    if h.kind == "constant":
        return OracleResult(h.values[0], "monte-carlo", 0.0, meta)
    vals = h(simulate_standardized_sums(dist, n, samples, seed, workers))
    stderr = float(np.std(vals, ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return OracleResult(float(np.mean(vals)), "monte-carlo", stderr, meta)


def monte_carlo_sup_deviation(dist, n: int, correction: bool, samples: int, seed: int,
                              xs=None) -> tuple[float, float, float]:
    """Empirical-CDF version of :func:`sup_deviation`: (sup error, argmax, stderr at argmax)."""
    m = compute_moments(dist)
    x = np.round(np.arange(-600, 601) * GAMMA_GRID_STEP, 12) if xs is None else np.asarray(xs, dtype=float)
    w = np.sort(simulate_standardized_sums(dist, n, samples, seed))
    ecdf = np.searchsorted(w, x, side="right") / samples
    approx = gaussian.cdf(x)
    if correction:
        approx = approx + edgeworth_cdf_correction(x, m.skewness, n)
    err = np.abs(ecdf - approx)
    i = int(np.argmax(err))
    stderr = math.sqrt(max(ecdf[i] * (1 - ecdf[i]), 1.0 / samples) / samples)
    return float(err[i]), float(x[i]), stderr
