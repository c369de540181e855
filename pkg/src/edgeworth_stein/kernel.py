"""Stein kernels: from gridded densities, closed form for Gaussian mixtures.

A Stein kernel tau of W satisfies E[(W - mu) f(W)] = E[tau(W) f'(W)] for
differentiable f whose boundary term tau p f vanishes.  For a density p on
(a, b) one choice is

    tau(x) = (1 / p(x)) * integral_x^b (y - mu) p(y) dy
           = -(1 / p(x)) * integral_a^x (y - mu) p(y) dy,

the two forms agreeing because the mean integral is zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, special

from .distributions import GaussianMixturePair, GridDensity, compute_moments
from .errors import (
    BoundaryTermNonzeroError,
    DensityVanishesError,
    DomainMismatchError,
    MeanMismatchError,
    ValidationError,
)

MEAN_TOL = 1e-8
DENSITY_FLOOR = 1e-300
BOUNDARY_TOL = 1e-8
# endpoint densities below this fraction of the peak are treated as vanishing
ENDPOINT_RELATIVE_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class KernelFunction:
    lo: float
    hi: float
    values: np.ndarray
    mean_used: float
    density: GridDensity

    @property
    def nodes(self) -> np.ndarray:
        return self.density.nodes

    def __call__(self, x):
        return np.interp(x, self.nodes, self.values)


def kernel_from_density(p: GridDensity, mu: float | None = None) -> KernelFunction:
    """Stein kernel of a gridded density.

    The mean integral is accumulated from the near end: from the left for
    nodes at or below the mean, from the right above it, which avoids
    dividing a cancelled difference by a small density in either tail.
    Endpoints where the density vanishes are filled by linear extrapolation
    from the two neighbouring interior nodes.
    """
    mean = compute_moments(p).mean
    if mu is None:
        mu = mean
    elif abs(mu - mean) > MEAN_TOL:
        raise MeanMismatchError(f"supplied mean {mu!r} differs from density mean {mean!r}")

    x = p.nodes
    dens = p.values
    if np.any(dens[1:-1] < DENSITY_FLOOR):
        raise DensityVanishesError("density vanishes at an interior node")

    integrand = (x - mu) * dens
    left = integrate.cumulative_simpson(integrand, x=x, initial=0.0)
    # integral_x^hi, accumulated from hi by integrating the mirrored integrand
    right = integrate.cumulative_simpson(integrand[::-1], x=-x[::-1], initial=0.0)[::-1]
    numer = np.where(x <= mu, -left, right)

    tau = np.empty_like(x)
    tau[1:-1] = numer[1:-1] / dens[1:-1]
    floor = ENDPOINT_RELATIVE_FLOOR * dens.max()
    for end, inner in ((0, (1, 2)), (-1, (-2, -3))):
        if dens[end] > floor:
            tau[end] = numer[end] / dens[end]
        else:
            tau[end] = 2.0 * tau[inner[0]] - tau[inner[1]]
    return KernelFunction(p.lo, p.hi, tau + 0.0, mu, p)  # + 0.0 turns -0.0 into 0.0


@dataclass(frozen=True)
class MixtureKernel:
    """Closed-form Stein kernel of a two-component Gaussian mixture."""

    mixture: GaussianMixturePair

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        g = self.mixture
        p, q = g.weight_p, 1.0 - g.weight_p
        s1, s2 = math.sqrt(g.var1), math.sqrt(g.var2)
        mean = g.mean
        t1, t2 = (x - g.mu1) / s1, (x - g.mu2) / s2
        with np.errstate(divide="ignore"):
            logw = np.log([p, q])
        # component densities on a common log scale
        lphi1 = logw[0] - 0.5 * t1**2 - math.log(s1)
        lphi2 = logw[1] - 0.5 * t2**2 - math.log(s2)
        upper = x >= mean
        # tail mass beyond x on the side away from the mean: Q(t) above, Phi(t) below
        ltail1 = np.where(upper, special.log_ndtr(-t1), special.log_ndtr(t1))
        ltail2 = np.where(upper, special.log_ndtr(-t2), special.log_ndtr(t2))
        ref = np.maximum(lphi1, lphi2)
        e1 = np.exp(lphi1 - ref)
        e2 = np.exp(lphi2 - ref)
        # sqrt(2 pi) converts log densities (without the constant) to tail units
        c = math.log(math.sqrt(2 * math.pi))
        tail1 = np.exp(logw[0] + ltail1 + c - ref)
        tail2 = np.exp(logw[1] + ltail2 + c - ref)
        sign = np.where(upper, 1.0, -1.0)
        # component mean offsets from the mixture mean: mu1 - mean = q (mu1 - mu2), etc.
        numer = g.var1 * e1 + g.var2 * e2 + sign * ((g.mu1 - mean) * tail1 + (g.mu2 - mean) * tail2)
        return numer / (e1 + e2)

    def sup_on(self, lo: float, hi: float, num: int = 20001) -> tuple[float, float]:
        """Max of |tau| over a dense uniform scan of [lo, hi] and where it occurs."""
        xs = np.linspace(lo, hi, num)
        vals = np.abs(self(xs))
        i = int(np.argmax(vals))
        return float(vals[i]), float(xs[i])

    def density(self, x):
        return self.mixture.pdf(x)

    @property
    def mean(self) -> float:
        return self.mixture.mean


def kernel_gaussian_mixture(g: GaussianMixturePair) -> MixtureKernel:
    return MixtureKernel(g)


def _mixture_grid(g: GaussianMixturePair, intervals: int, width: float = 12.0) -> tuple[np.ndarray, np.ndarray]:
    m = compute_moments(g)
    lo = min(g.mu1 - width * math.sqrt(g.var1), g.mu2 - width * math.sqrt(g.var2), m.mean - width * m.sigma)
    hi = max(g.mu1 + width * math.sqrt(g.var1), g.mu2 + width * math.sqrt(g.var2), m.mean + width * m.sigma)
    x = np.linspace(lo, hi, intervals + 1)
    w = np.ones_like(x)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return x, w * (hi - lo) / intervals / 3.0


def _kernel_samples(kernel, intervals):
    """(nodes, Simpson weights, tau, density, mean) for either kernel type."""
    if isinstance(kernel, KernelFunction):
        d = kernel.density
        return d.nodes, d.weights, kernel.values, d.values, kernel.mean_used
    if isinstance(kernel, MixtureKernel):
        x, w = _mixture_grid(kernel.mixture, intervals)
        return x, w, kernel(x), kernel.density(x), kernel.mean
    raise TypeError(f"unsupported kernel {type(kernel).__name__}")


def check_kernel_identity(kernel, f: Callable, fprime: Callable, intervals: int = 4096) -> float:
    """Signed residual E[(W - mu) f(W)] - E[tau(W) f'(W)].

    Mixture kernels are integrated over the mixture range widened by twelve
    standard deviations, with ``intervals`` Simpson panels.
    """
    x, w, tau, dens, mu = _kernel_samples(kernel, intervals)
    fx = np.asarray(f(x), dtype=float) * np.ones_like(x)
    fpx = np.asarray(fprime(x), dtype=float) * np.ones_like(x)
    for end in (0, -1):
        term = abs(tau[end] * dens[end] * fx[end])
        if term > BOUNDARY_TOL:
            raise BoundaryTermNonzeroError(f"boundary term {term:.3e} at x={x[end]:.6g}")
    lhs = float(np.dot(w, (x - mu) * fx * dens))
    rhs = float(np.dot(w, tau * fpx * dens))
    return lhs - rhs


def kernel_stats(k: KernelFunction, p: GridDensity) -> tuple[float, float]:
    """(E tau(X), E tau(X)^2) for X with density ``p``."""
    compute_moments(p)
    if (k.lo, k.hi) != (p.lo, p.hi) or k.values.size != p.values.size:
        raise DomainMismatchError("kernel and density grids differ")
    return p.expect(k.values), p.expect(k.values**2)


def mixture_kernel_stats(k: MixtureKernel, intervals: int = 4096) -> tuple[float, float]:
    x, w = _mixture_grid(k.mixture, intervals)
    dens = k.density(x)
    tau = k(x)
    return float(np.dot(w, tau * dens)), float(np.dot(w, tau**2 * dens))


def smooth_battery() -> list[tuple[str, Callable, Callable]]:
    """Ten smooth test functions (name, f, f') used for identity checks."""
    return [
        ("one", lambda w: np.ones_like(w), lambda w: np.zeros_like(w)),
        ("linear", lambda w: w, lambda w: np.ones_like(w)),
        ("square", lambda w: w**2, lambda w: 2 * w),
        ("cube", lambda w: w**3, lambda w: 3 * w**2),
        ("sin", np.sin, np.cos),
        ("cos", np.cos, lambda w: -np.sin(w)),
        ("tanh", np.tanh, lambda w: 1.0 / np.cosh(w) ** 2),
        ("arctan", np.arctan, lambda w: 1.0 / (1.0 + w**2)),
        ("bump", lambda w: np.exp(-(w**2)), lambda w: -2 * w * np.exp(-(w**2))),
        ("sin2", lambda w: np.sin(2 * w + 0.3), lambda w: 2 * np.cos(2 * w + 0.3)),
    ]


def validate_kernel(k: KernelFunction) -> None:
    if np.min(k.values) < -1e-10:
        raise ValidationError("Stein kernel is negative at a node")
