"""Two-term Edgeworth approximation E h(W) ~ E h(Z) + gamma/(6 sqrt n) E[(Z^3 - 3Z) h(Z)]."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import gaussian
from .distributions import MomentSummary
from .errors import UnboundedTestFunctionError, ValidationError
from .stein_equation import normal_expectation
from .testfunctions import TestFunction

LATTICE_SNAP_TOL = 1e-9


def _hermite_antiderivative(y: float) -> float:
    """-(y^2 - 1) phi(y), an antiderivative of (y^3 - 3y) phi(y); zero at +-inf."""
    if math.isinf(y):
        return 0.0
    return -(y * y - 1.0) * gaussian.INV_SQRT_2PI * math.exp(-0.5 * y * y)


def hermite_correction_functional(h: TestFunction) -> float:
    """E[(Z^3 - 3Z) h(Z)]; exact for step functions, Gauss-Hermite otherwise."""
    if not math.isfinite(h.bound):
        raise UnboundedTestFunctionError("test function is unbounded")
    if h.is_step:
        edges = [-math.inf, *h.breaks, math.inf]
        return math.fsum(
            v * (_hermite_antiderivative(b) - _hermite_antiderivative(a))
            for v, a, b in zip(h.values, edges[:-1], edges[1:])
        )
    z, w = gaussian.hermite_rule(128)
    return float(np.dot(w, (z**3 - 3 * z) * h(z)))


def edgeworth_cdf_value(x, gamma: float, n: int):
    """Phi(x) + gamma (1 - x^2) phi(x) / (6 sqrt n), deliberately not clamped to [0, 1]."""
    if n < 1:
        raise ValidationError("n must be a positive integer")
    x = np.asarray(x, dtype=float)
    out = gaussian.cdf(x) + gamma * (1.0 - x * x) * gaussian.pdf(x) / (6.0 * math.sqrt(n))
    return float(out) if out.ndim == 0 else out


def edgeworth_cdf_correction(x, gamma: float, n: int):
    x = np.asarray(x, dtype=float)
    return gamma * (1.0 - x * x) * gaussian.pdf(x) / (6.0 * math.sqrt(n))


@dataclass(frozen=True)
class ExpansionEstimate:
    base: float
    correction: float
    total: float
    n: int
    gamma: float


def expand_expectation(h: TestFunction, m: MomentSummary, n: int) -> ExpansionEstimate:
    if n < 1:
        raise ValidationError("n must be a positive integer")
    base = normal_expectation(h)
    correction = m.skewness / (6.0 * math.sqrt(n)) * hermite_correction_functional(h)
    return ExpansionEstimate(base, correction, base + correction, n, m.skewness)


def snap_to_midpoint(raw: float) -> float:
    """Nearest half-integer at or above the integer cell containing ``raw``.

    A value on an integer (within tolerance) maps to the midpoint just above,
    so the indicator keeps that lattice point.
    """
    r = round(raw)
    if abs(raw - r) <= LATTICE_SNAP_TOL * max(1.0, abs(raw)):
        return r + 0.5
    return math.floor(raw) + 0.5


def cellify_test_function(x: float, sigma: float, n: int, shift: float) -> TestFunction:
    """Indicator 1{w <= x'} with x' moved to the midpoint between lattice points of W.

    W = (S_n - shift) / (sigma sqrt n) with S_n integer valued.
    """
    scale = sigma * math.sqrt(n)
    if not scale > 0:
        raise ValidationError("sigma * sqrt(n) must be positive")
    raw = x * scale + shift
    threshold = (snap_to_midpoint(raw) - shift) / scale
    return TestFunction(
        "cell-constant",
        (threshold,),
        (1.0, 0.0),
        meta={"threshold": threshold, "width": 1.0 / scale, "raw_threshold": snap_to_midpoint(raw)},
    )


def lattice_cell_function(values, first: int, sigma: float, n: int, shift: float,
                          left: float = 0.0, right: float = 0.0) -> TestFunction:
    """General cell-constant h: ``values[i]`` on the cell of the W-lattice point for S_n = first + i."""
    scale = sigma * math.sqrt(n)
    centers = (np.arange(len(values)) + first - shift) / scale
    return TestFunction.cell_constant(centers, 1.0 / scale, values, left, right)
