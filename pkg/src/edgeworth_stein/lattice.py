"""Lattice tools: gcd and Bezout certificates for a Bernoulli(1/2) component,
binomial local CLT and the binomial-versus-Gaussian comparison for
cell-constant test functions.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from . import gaussian
from .distributions import LatticeDistribution
from .errors import (
    GcdNotOneError,
    SingletonSupportError,
    TestFunctionNotCellConstantError,
    ValidationError,
    XNotInLatticeError,
    XOutsideWindowError,
)
from .oracle import lattice_power_pmf
from .testfunctions import TestFunction

LOCAL_SEARCH_BOX = 3
EXACT_BINOMIAL_MAX_N = 64
LATTICE_TOL = 1e-9


def support_gcd(support) -> int:
    """gcd of |s_i - s_0| over the support."""
    support = list(support)
    if len(support) < 2:
        raise SingletonSupportError("support needs at least two points")
    s0 = support[0]
    return reduce(math.gcd, (abs(int(s) - int(s0)) for s in support[1:]), 0)


def extended_gcd(a: int, b: int) -> tuple[int, int, int]:
    """(g, x, y) with a x + b y = g = gcd(a, b) >= 0."""
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def _cost(coef) -> tuple:
    return (sum(1 for c in coef if c == 0), sum(abs(c) for c in coef), max(abs(c) for c in coef),
            tuple(abs(c) for c in reversed(coef)), tuple(reversed(coef)))


def bezout_coefficients(offsets) -> tuple[int, ...]:
    """Nonzero integers m_i with sum m_i d_i = 1.

    Extended Euclid is folded left to right over the offsets, then a local
    search adds small multiples of the pairwise kernel vectors
    (d_j/g) e_i - (d_i/g) e_j, moving right to left, while that lowers
    (number of zeros, sum |m_i|, max |m_i|).
    """
    d = [int(v) for v in offsets]
    if not d or any(v <= 0 for v in d):
        raise ValidationError("offsets must be positive integers")
    if reduce(math.gcd, d) != 1:
        raise GcdNotOneError(f"gcd of offsets {d} is not 1")
    r = len(d)
    coef = [1]
    g = d[0]
    for k in range(1, r):
        g, x, y = extended_gcd(g, d[k])
        coef = [c * x for c in coef] + [y]
    assert g == 1 and sum(c * v for c, v in zip(coef, d)) == 1

    moves = []
    for i, j in itertools.combinations(range(r), 2):
        gij = math.gcd(d[i], d[j])
        vec = [0] * r
        vec[i], vec[j] = d[j] // gij, -(d[i] // gij)
        moves.append(vec)
    moves.reverse()
    best = coef
    improved = True
    while improved:
        improved = False
        for vec in moves:
            for c in range(-LOCAL_SEARCH_BOX, LOCAL_SEARCH_BOX + 1):
                if c == 0:
                    continue
                cand = [a + c * v for a, v in zip(best, vec)]
                if _cost(cand) < _cost(best):
                    best, improved = cand, True
    if any(c == 0 for c in best):
        raise GcdNotOneError(f"no nonzero Bezout solution found for {d}")
    assert sum(c * v for c, v in zip(best, d)) == 1
    return tuple(best)


@dataclass(frozen=True)
class BezoutCertificate:
    offsets: tuple[int, ...]
    coefficients: tuple[int, ...]
    group_size: int
    shift: int
    weight: float
    masses: tuple[float, float]

    def as_dict(self) -> dict:
        return {
            "offsets": list(self.offsets),
            "coefficients": list(self.coefficients),
            "m": self.group_size,
            "z": self.shift,
            "weight": self.weight,
        }


def bernoulli_component_grouping(dist: LatticeDistribution) -> BezoutCertificate:
    """Certificate that a sum of m i.i.d. copies has a Bernoulli(1/2) component.

    m is the l1 norm of the Bezout coefficients.  The shift z (in raw-sum
    units) is the adjacent pair z, z+1 of the exact m-fold pmf maximizing
    min(P(S_m = z), P(S_m = z+1)); ties go to the smallest z.  The weight is
    twice that minimum.
    """
    if support_gcd(dist.support) != 1:
        raise GcdNotOneError("support offsets do not have gcd 1")
    offsets = dist.offsets[1:]
    coef = bezout_coefficients(offsets)
    m = sum(abs(c) for c in coef)
    pmf = lattice_power_pmf(dist, m)
    pair_min = np.minimum(pmf.probs[:-1], pmf.probs[1:])
    i = int(np.argmax(pair_min))
    if not pair_min[i] > 0:
        raise GcdNotOneError("no adjacent pair with positive mass")
    z = pmf.offset + i
    return BezoutCertificate(
        tuple(offsets), coef, m, int(z), float(2.0 * pair_min[i]),
        (float(pmf.probs[i]), float(pmf.probs[i + 1])),
    )


# local CLT ----------------------------------------------------------------------

def binomial_pmf(n: int, z: int) -> float:
    """C(n, z) / 2^n; exact integers for n <= 64, log-gamma beyond."""
    if not 0 <= z <= n:
        return 0.0
    if n <= EXACT_BINOMIAL_MAX_N:
        return math.comb(n, z) / 2**n
    return math.exp(math.lgamma(n + 1) - math.lgamma(z + 1) - math.lgamma(n - z + 1) - n * math.log(2.0))


@dataclass(frozen=True)
class LocalCLTResult:
    approx: float
    exact: float
    scaled_error: float


def local_clt_window(n: int) -> np.ndarray:
    """A_n: lattice points 2z/sqrt(n) - sqrt(n) with |x| <= n^(1/4)/8."""
    z = np.arange(n + 1)
    x = 2 * z / math.sqrt(n) - math.sqrt(n)
    return x[np.abs(x) <= n**0.25 / 8 + 1e-12]


def binomial_local_clt_approx(n: int, x: float) -> LocalCLTResult:
    """Compare P((2/sqrt n) sum (X_i - 1/2) = x) for Ber(1/2) with 2 phi(x)/sqrt(n)."""
    if n < 1:
        raise ValidationError("n must be a positive integer")
    zf = (x * math.sqrt(n) + n) / 2.0
    z = round(zf)
    if abs(zf - z) > LATTICE_TOL * max(1.0, n) or not 0 <= z <= n:
        raise XNotInLatticeError(f"x={x} is not of the form 2z/sqrt(n) - sqrt(n)")
    if abs(x) > n**0.25 / 8 + 1e-12:
        raise XOutsideWindowError(f"|x|={abs(x)} exceeds n^(1/4)/8")
    x_exact = 2 * z / math.sqrt(n) - math.sqrt(n)
    approx = 2.0 / math.sqrt(2 * math.pi * n) * math.exp(-0.5 * x_exact**2)
    exact = binomial_pmf(n, z)
    scaled = abs(exact / approx - 1.0) * n / (1.0 + x_exact**4)
    return LocalCLTResult(approx, exact, scaled)


def max_local_clt_error(n: int) -> float:
    return max(binomial_local_clt_approx(n, x).scaled_error for x in local_clt_window(n))


# binomial versus Gaussian ----------------------------------------------------------

def integer_cell_values(h: TestFunction, lo: int, hi: int) -> np.ndarray:
    """Values of h on the unit cells around lo..hi, verifying cell-constancy."""
    if h.is_step:
        bad = [b for b in h.breaks if abs(b - (math.floor(b) + 0.5)) > LATTICE_TOL]
        if bad:
            raise TestFunctionNotCellConstantError(f"breakpoints {bad} are not half-integers")
        return h(np.arange(lo, hi + 1, dtype=float))
    k = np.arange(lo, hi + 1, dtype=float)
    probes = k[:, None] + np.linspace(-0.49, 0.49, 9)[None, :]
    vals = h(probes)
    if np.any(np.ptp(vals, axis=1) > 0):
        raise TestFunctionNotCellConstantError("test function varies inside a unit cell")
    return vals[:, 0]


def binomial_vs_gaussian_expectation(l: int, h: TestFunction) -> tuple[float, float, float]:
    """(E h(S), E h(l/2 + Z sqrt(l/4)), difference) for S ~ Bin(l, 1/2)."""
    if l < 1:
        raise ValidationError("l must be a positive integer")
    if h.bound > 1.0 + 1e-12:
        raise ValidationError("test function must satisfy |h| <= 1")
    pad = int(math.ceil(10 * math.sqrt(l))) + 1
    lo, hi = -pad, l + pad
    vals = integer_cell_values(h, lo, hi)
    k = np.arange(lo, hi + 1)
    pmf = np.array([binomial_pmf(l, int(v)) for v in k])
    lhs = math.fsum(pmf * vals)
    sd = math.sqrt(l / 4.0)
    upper = (k + 0.5 - l / 2.0) / sd
    lower = (k - 0.5 - l / 2.0) / sd
    cell = gaussian.prob_between(lower, upper)
    # cells beyond the scanned range carry the constant tail values of h
    left_tail = float(gaussian.cdf(lower[0])) * float(h(np.array([lo - 1.0]))[0])
    right_tail = float(gaussian.cdf(-upper[-1])) * float(h(np.array([hi + 1.0]))[0])
    rhs = math.fsum(cell * vals) + left_tail + right_tail
    return lhs, rhs, lhs - rhs


def midpoint_sup_gap(l: int) -> float:
    """max over thresholds k + 1/2 of |P(S <= k) - P(l/2 + Z sqrt(l/4) <= k + 1/2)|."""
    return max(abs(binomial_vs_gaussian_expectation(l, TestFunction.indicator(k + 0.5))[2]) for k in range(-1, l + 1))
