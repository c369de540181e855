"""Normal Stein equation f'(w) - w f(w) = h(w) - E h(Z) and its iterate.

The bounded solution is

    f(w) =  exp(w^2/2) * integral_{-inf}^w (h - Eh) exp(-x^2/2) dx     (w <= 0)
         = -exp(w^2/2) * integral_w^{inf} (h - Eh) exp(-x^2/2) dx      (w > 0)

Both branches are evaluated as integrals of u(x) exp((w^2 - x^2)/2) over
x on the far side of w, so the weight never exceeds one.  Integration runs
over Gauss-Legendre panels whose edges include every discontinuity of h.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial import Polynomial

from . import gaussian
from .errors import SigmaNonpositiveError, UnboundedTestFunctionError
from .testfunctions import TestFunction

DEFAULT_LIMIT = 12.0
DEFAULT_SPACING = 1.0 / 32.0
PANEL_ORDER = 12


def normal_expectation(h: TestFunction) -> float:
    """E h(Z): exact for step functions, 128-point Gauss-Hermite otherwise."""
    if not math.isfinite(h.bound):
        raise UnboundedTestFunctionError("test function is unbounded")
    if h.is_step:
        edges = [-math.inf, *h.breaks, math.inf]
        return math.fsum(v * float(gaussian.prob_between(a, b)) for v, a, b in zip(h.values, edges[:-1], edges[1:]))
    return gaussian.expect_normal(h)


@dataclass(eq=False)
class SolutionFunction:
    """Bounded solution of f' - w f = u on a panel grid, u = h - E h(Z).

    ``values`` and ``derivative_values`` live at ``nodes``; the derivative comes
    from the equation itself.  The object is callable anywhere: off-node values
    are integrated from the nearest node on the stable side.
    """

    nodes: np.ndarray
    values: np.ndarray
    derivative_values: np.ndarray
    source: Callable[[np.ndarray], np.ndarray]
    centering: float
    breakpoints: tuple[float, ...] = ()
    test: object = None
    _order: int = field(default=PANEL_ORDER, repr=False)

    @property
    def lo(self) -> float:
        return float(self.nodes[0])

    @property
    def hi(self) -> float:
        return float(self.nodes[-1])

    def rhs(self, w):
        """u(w) = h(w) - E h(Z)."""
        return self.source(w) - self.centering

    def __call__(self, w):
        w = np.asarray(w, dtype=float)
        flat = w.ravel()
        out = np.empty_like(flat)
        x = self.nodes
        left = flat <= 0.0
        # left branch: integrate forward from the node at or below w
        if np.any(left):
            t = np.clip(flat[left], x[0], x[-1])
            k = np.clip(np.searchsorted(x, t, side="right") - 1, 0, x.size - 1)
            a = x[k]
            out[left] = self.values[k] * np.exp(0.5 * (t * t - a * a)) + self._partial(a, t)
            beyond = flat[left] < x[0]
            if np.any(beyond):
                out[np.flatnonzero(left)[beyond]] = self.rhs(flat[left][beyond]) * gaussian.left_mills(flat[left][beyond])
        if np.any(~left):
            t = np.clip(flat[~left], x[0], x[-1])
            k = np.clip(np.searchsorted(x, t, side="left"), 0, x.size - 1)
            b = x[k]
            out[~left] = self.values[k] * np.exp(0.5 * (t * t - b * b)) - self._partial(t, b)
            beyond = flat[~left] > x[-1]
            if np.any(beyond):
                z = flat[~left][beyond]
                out[np.flatnonzero(~left)[beyond]] = -self.rhs(z) * gaussian.left_mills(-z)
        return out.reshape(w.shape)

    def _partial(self, a, b):
        """integral_a^b u(x) exp((w^2 - x^2)/2) dx with w the endpoint nearer 0.

        ``a <= b`` elementwise and no breakpoint lies strictly inside [a, b].
        """
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        anchor = np.where(np.abs(a) <= np.abs(b), a, b)
        anchor = np.where(b <= 0.0, b, np.where(a >= 0.0, a, anchor))
        t, wts = gaussian.legendre_rule(self._order)
        pts = a[:, None] + (b - a)[:, None] * t[None, :]
        vals = self.rhs(pts.ravel()).reshape(pts.shape)
        weight = np.exp(0.5 * (anchor[:, None] ** 2 - pts**2))
        return (b - a) * np.sum(vals * weight * wts[None, :], axis=1)

    def derivative(self, w):
        """f'(w) = w f(w) + u(w)."""
        w = np.asarray(w, dtype=float)
        return w * self(w) + self.rhs(w)

    def one_sided_derivatives(self) -> np.ndarray:
        """f' at the nodes plus both one-sided limits at every breakpoint."""
        extra = []
        for b in self.breakpoints:
            if self.lo < b < self.hi:
                fb = float(self(np.array([b]))[0])
                for side in (-math.inf, math.inf):
                    extra.append(b * fb + float(self.rhs(np.array([np.nextafter(b, side)]))[0]))
        return np.concatenate([self.derivative_values, np.asarray(extra)])

    def sup_norms(self) -> tuple[float, float]:
        """(sup |f|, sup |f'|) over the grid, including jump limits of f'."""
        return float(np.max(np.abs(self.values))), float(np.max(np.abs(self.one_sided_derivatives())))

    def equation_residual(self) -> float:
        """Max node residual of f' - w f - u, with f' as stored."""
        x = self.nodes
        return float(np.max(np.abs(self.derivative_values - x * self.values - self.rhs(x))))


def _solve(source, centering, breakpoints, limit, spacing, test=None) -> SolutionFunction:
    brk = tuple(sorted(b for b in breakpoints if -limit < b < limit))
    nodes = gaussian.panel_edges(-limit, limit, spacing, (*brk, 0.0))
    sol = SolutionFunction(nodes, np.zeros_like(nodes), np.zeros_like(nodes), source, centering, brk, test)
    x = nodes
    a, b = x[:-1], x[1:]
    incr = sol._partial(a, b)  # anchored at the endpoint nearer 0
    f = np.empty_like(x)
    i0 = int(np.flatnonzero(x == 0.0)[0])
    # left sweep: constant tail beyond -limit, then forward recurrence
    f[0] = sol.rhs(x[:1])[0] * gaussian.left_mills(x[0])
    for k in range(i0):
        f[k + 1] = f[k] * math.exp(0.5 * (x[k + 1] ** 2 - x[k] ** 2)) + incr[k]
    # right sweep from +limit back to 0 (exclusive of the left value at 0)
    f[-1] = -sol.rhs(x[-1:])[0] * gaussian.left_mills(-x[-1])
    right0 = None
    for k in range(x.size - 2, i0 - 1, -1):
        val = f[k + 1] * math.exp(0.5 * (x[k] ** 2 - x[k + 1] ** 2)) - incr[k]
        if k == i0:
            right0 = val
        else:
            f[k] = val
    sol.values = f
    sol.derivative_values = x * f + sol.rhs(x)
    sol.branch_gap = abs(right0 - f[i0]) if right0 is not None else 0.0
    return sol


def solve_stein_first(h: TestFunction, *, limit: float = DEFAULT_LIMIT, spacing: float = DEFAULT_SPACING) -> SolutionFunction:
    """Bounded solution of f' - w f = h - E h(Z) on [-limit, limit]."""
    if not math.isfinite(h.bound):
        raise UnboundedTestFunctionError("test function is unbounded")
    eh = normal_expectation(h)
    return _solve(h, eh, h.breakpoints, limit, spacing, test=h)


def solve_stein_second(f_sol: SolutionFunction, *, spacing: float | None = None) -> SolutionFunction:
    """Bounded solution g of g' - w g = f' - E f'(Z)."""
    fprime = f_sol.derivative
    centering = gaussian.expect_normal(fprime, f_sol.breakpoints or (0.0,))
    spacing = float(np.min(np.diff(f_sol.nodes))) if spacing is None else spacing
    spacing = max(spacing, DEFAULT_SPACING)
    limit = f_sol.hi
    return _solve(fprime, centering, f_sol.breakpoints, limit, spacing, test=f_sol)


def solution_expectation(sol: SolutionFunction) -> float:
    """E sol(Z) by panel quadrature aligned with the solution's kinks."""
    return gaussian.expect_normal(sol, sol.breakpoints or (0.0,), limit=min(sol.hi, 12.0))


def hermite_functional(h: TestFunction) -> float:
    """E[(Z^3 - 3Z) h(Z)]."""
    from .edgeworth import hermite_correction_functional

    return hermite_correction_functional(h)


def second_solution_expectation_identity(h: TestFunction) -> tuple[float, float, float]:
    """(E g(Z), E[(Z^3 - 3Z) h(Z)] / 3, |difference|) for g from the iterated equation."""
    f_sol = solve_stein_first(h)
    g_sol = solve_stein_second(f_sol)
    lhs = solution_expectation(g_sol)
    rhs = hermite_functional(h) / 3.0
    return lhs, rhs, abs(lhs - rhs)


def stein_norm_bounds(h: TestFunction) -> tuple[float, float]:
    """Classical bounds (sqrt(pi/2) ||h - Eh||, 2 ||h - Eh||)."""
    eh = normal_expectation(h)
    if h.is_step:
        dev = max(abs(v - eh) for v in h.values)
    else:
        dev = h.scan_bound() + abs(eh)
    return math.sqrt(math.pi / 2.0) * dev, 2.0 * dev


# Gaussian smoothing ---------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SmoothedFunction:
    """h1(x) = E[h(sigma Z + x) P(Z)] and its derivatives."""

    h: TestFunction
    sigma: float
    poly: Polynomial

    def weight_poly(self, k: int) -> Polynomial:
        """Q_k with d^k h1/dx^k = sigma^-k E[Q_k(Z) h(sigma Z + x)]."""
        q = self.poly
        z = Polynomial([0.0, 1.0])
        for _ in range(k):
            q = z * q - q.deriv()
        return q

    def derivative(self, x, k: int = 0):
        scalar = np.ndim(x) == 0
        x = np.atleast_1d(np.asarray(x, dtype=float))
        q = self.weight_poly(k)
        if self.h.is_step:
            edges = np.array([-math.inf, *self.h.breaks, math.inf])
            out = np.zeros_like(x)
            for v, a, b in zip(self.h.values, edges[:-1], edges[1:]):
                if v == 0.0:
                    continue
                za = (a - x) / self.sigma
                zb = (b - x) / self.sigma
                out += v * np.array([gaussian.poly_expectation(q, lo, hi) for lo, hi in zip(za, zb)])
        else:
            z, w = gaussian.hermite_rule(128)
            vals = self.h(self.sigma * z[None, :] + x[:, None]) * q(z)[None, :]
            out = vals @ w
        out = out / self.sigma**k
        return float(out[0]) if scalar else out

    def __call__(self, x):
        return self.derivative(x, 0)

    def constant(self, k: int) -> float:
        """E|Q_k(Z)|, the derivative bound constant produced by the exchange formula."""
        return gaussian.abs_poly_expectation(self.weight_poly(k))

    def bound_report(self, xs=None, kmax: int = 3) -> dict[int, tuple[float, float]]:
        """{k: (sup |h1^(k)| sigma^k / ||h||, E|Q_k(Z)|)} over the scan points ``xs``."""
        xs = np.linspace(-10, 10, 4001) if xs is None else np.asarray(xs, dtype=float)
        norm = self.h.bound
        report = {}
        for k in range(kmax + 1):
            measured = float(np.max(np.abs(self.derivative(xs, k)))) * self.sigma**k
            report[k] = (measured / norm if norm > 0 else 0.0, self.constant(k))
        return report


def gaussian_smooth(h: TestFunction, sigma: float, poly=(1.0,)) -> SmoothedFunction:
    """Smooth ``h`` against N(0, sigma^2) with polynomial weight ``poly``.

    ``poly`` holds coefficients in increasing degree order.
    """
    if not sigma > 0:
        raise SigmaNonpositiveError("sigma must be positive")
    if not math.isfinite(h.bound):
        raise UnboundedTestFunctionError("test function is unbounded")
    p = poly if isinstance(poly, Polynomial) else Polynomial(np.asarray(poly, dtype=float))
    return SmoothedFunction(h, float(sigma), p)
