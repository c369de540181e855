"""Standard normal helpers shared by the expansion and Stein modules.

Everything here is for Z ~ N(0, 1): density, CDF, Mills-type ratios that stay
finite in the tails, exact truncated polynomial moments, and quadrature rules.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from numpy.polynomial import Polynomial
from scipy import special

SQRT_2PI = math.sqrt(2.0 * math.pi)
INV_SQRT_2PI = 1.0 / SQRT_2PI


def pdf(x):
    x = np.asarray(x, dtype=float)
    return INV_SQRT_2PI * np.exp(-0.5 * x * x)


def cdf(x):
    return special.ndtr(np.asarray(x, dtype=float))


def prob_between(a, b):
    """P(a < Z <= b), accurate when both limits sit in the same tail."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    upper = special.ndtr(-a) - special.ndtr(-b)
    lower = special.ndtr(b) - special.ndtr(a)
    return np.where(a > 0, upper, lower)


def left_mills(x):
    """sqrt(2*pi) * Phi(x) * exp(x**2 / 2), finite for every real x."""
    x = np.asarray(x, dtype=float)
    return math.sqrt(math.pi / 2.0) * special.erfcx(-x / math.sqrt(2.0))


def truncated_moments(a, b, kmax: int) -> np.ndarray:
    """Return [E Z^k 1{a < Z <= b} for k = 0..kmax]; limits may be infinite."""
    a = float(a)
    b = float(b)
    out = np.zeros(kmax + 1)
    if not a < b:
        return out

    def edge(t: float, k: int) -> float:
        # t**k * phi(t), vanishing at infinity
        if math.isinf(t):
            return 0.0
        return t**k * INV_SQRT_2PI * math.exp(-0.5 * t * t)

    out[0] = float(prob_between(a, b))
    if kmax >= 1:
        out[1] = edge(a, 0) - edge(b, 0)
    for k in range(2, kmax + 1):
        out[k] = (k - 1) * out[k - 2] + edge(a, k - 1) - edge(b, k - 1)
    return out


def poly_expectation(poly: Polynomial, a=-math.inf, b=math.inf) -> float:
    """E[poly(Z) 1{a < Z <= b}] in closed form."""
    coef = np.asarray(poly.coef, dtype=float)
    moments = truncated_moments(a, b, len(coef) - 1)
    return float(np.dot(coef, moments))


def abs_poly_expectation(poly: Polynomial) -> float:
    """E|poly(Z)|, splitting the real line at the real roots of ``poly``."""
    coef = np.trim_zeros(np.asarray(poly.coef, dtype=float), "b")
    if coef.size == 0:
        return 0.0
    poly = Polynomial(coef)
    roots = poly.roots() if coef.size > 1 else np.array([])
    real = np.sort([r.real for r in np.atleast_1d(roots) if abs(r.imag) < 1e-12])
    edges = [-math.inf, *real, math.inf]
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        if not lo < hi:
            continue
        if math.isinf(lo) and math.isinf(hi):
            mid = 0.0
        elif math.isinf(lo):
            mid = hi - 1.0
        elif math.isinf(hi):
            mid = lo + 1.0
        else:
            mid = 0.5 * (lo + hi)
        sign = 1.0 if poly(mid) >= 0 else -1.0
        total += sign * poly_expectation(poly, lo, hi)
    return total


@lru_cache(maxsize=None)
def hermite_rule(order: int = 128) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Hermite nodes and weights normalised so sum(w * g(x)) ~ E g(Z)."""
    x, w = np.polynomial.hermite_e.hermegauss(order)
    w = w / SQRT_2PI
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@lru_cache(maxsize=None)
def legendre_rule(order: int = 12) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre rule on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(order)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panel_edges(lo: float, hi: float, spacing: float, breakpoints=()) -> np.ndarray:
    """Uniform grid on [lo, hi] with the interior breakpoints merged in.

    Grid nodes closer than ``spacing / 64`` to a breakpoint are dropped so no
    panel degenerates.
    """
    count = max(1, int(round((hi - lo) / spacing)))
    nodes = np.linspace(lo, hi, count + 1)
    brk = np.asarray([b for b in breakpoints if lo < b < hi], dtype=float)
    if brk.size:
        keep = np.ones(nodes.size, dtype=bool)
        for b in brk:
            keep &= np.abs(nodes - b) > spacing / 64
        keep[0] = keep[-1] = True
        nodes = np.union1d(nodes[keep], brk)
    return nodes


def expect_normal(fn, breakpoints=(), *, limit: float = 12.0, spacing: float = 0.125, order: int = 16) -> float:
    """E fn(Z) for ``fn`` smooth between the given breakpoints.

    Without breakpoints the 128-point Gauss-Hermite rule is used; otherwise
    Gauss-Legendre panels aligned with the breakpoints cover [-limit, limit].
    """
    brk = [b for b in breakpoints if -limit < b < limit]
    if not brk:
        x, w = hermite_rule(128)
        return float(np.dot(w, fn(x)))
    edges = panel_edges(-limit, limit, spacing, brk)
    t, w = legendre_rule(order)
    a = edges[:-1, None]
    width = np.diff(edges)[:, None]
    pts = a + width * t[None, :]
    vals = fn(pts.ravel()).reshape(pts.shape) * pdf(pts)
    return float(np.sum(vals * width * w[None, :]))
