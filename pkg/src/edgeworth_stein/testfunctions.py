"""Bounded test functions h used throughout the expansion and Stein checks.

Three kinds are supported:

* step functions (indicators, sign, per-cell constants) stored as sorted
  breakpoints plus one value per interval; these admit closed-form Gaussian
  integrals,
* grid-sampled functions, linearly interpolated and held constant outside
  the grid,
* arbitrary smooth callables with a declared sup-norm bound.

Step functions are left-closed at each breakpoint in the sense that
``h(b) = values[i]`` for the interval ending at ``b``; an indicator of
``w <= x`` therefore includes ``x`` itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import UnboundedTestFunctionError, ValidationError

STEP_KINDS = ("constant", "indicator", "sign", "step", "cell-constant")


@dataclass(frozen=True, eq=False)
class TestFunction:
    __test__ = False

    kind: str
    breaks: tuple[float, ...] = ()
    values: tuple[float, ...] = ()
    fn: Callable[[np.ndarray], np.ndarray] | None = None
    bound: float = math.inf
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.is_step:
            if len(self.values) != len(self.breaks) + 1:
                raise ValidationError("step function needs one more value than breakpoints")
            if any(b1 >= b2 for b1, b2 in zip(self.breaks, self.breaks[1:])):
                raise ValidationError("breakpoints must be strictly increasing")
            scanned = max(abs(v) for v in self.values)
            if not math.isfinite(scanned):
                raise UnboundedTestFunctionError("step values must be finite")
            object.__setattr__(self, "bound", scanned)
        elif self.fn is None:
            raise ValidationError(f"kind {self.kind!r} requires a callable")
        if not math.isfinite(self.bound):
            raise UnboundedTestFunctionError("test function has no finite sup-norm bound")

    # construction -----------------------------------------------------

    @classmethod
    def constant(cls, c: float) -> "TestFunction":
        return cls("constant", (), (float(c),))

    @classmethod
    def indicator(cls, x: float) -> "TestFunction":
        """h(w) = 1{w <= x}."""
        return cls("indicator", (float(x),), (1.0, 0.0), meta={"threshold": float(x)})

    @classmethod
    def sign(cls) -> "TestFunction":
        return cls("sign", (0.0,), (-1.0, 1.0))

    @classmethod
    def step(cls, breaks, values) -> "TestFunction":
        return cls("step", tuple(float(b) for b in breaks), tuple(float(v) for v in values))

    @classmethod
    def cell_constant(cls, centers, width: float, values, left: float = 0.0, right: float = 0.0) -> "TestFunction":
        """Constant on each cell (c - width/2, c + width/2] around consecutive centers.

        ``left``/``right`` are the values taken below the first and above the
        last cell.
        """
        centers = np.asarray(centers, dtype=float)
        if centers.size == 0 or len(values) != centers.size:
            raise ValidationError("need one value per cell center")
        if centers.size > 1 and not np.allclose(np.diff(centers), width, rtol=1e-9, atol=0.0):
            raise ValidationError("cell centers must be spaced by the cell width")
        breaks = np.concatenate([centers - width / 2, [centers[-1] + width / 2]])
        vals = (float(left), *map(float, values), float(right))
        return cls("cell-constant", tuple(breaks), vals, meta={"width": float(width)})

    @classmethod
    def smooth(cls, fn, bound: float) -> "TestFunction":
        return cls("smooth", fn=fn, bound=float(bound))

    @classmethod
    def grid(cls, xs, values) -> "TestFunction":
        xs = np.asarray(xs, dtype=float)
        vals = np.asarray(values, dtype=float)
        if xs.shape != vals.shape or xs.size < 2 or np.any(np.diff(xs) <= 0):
            raise ValidationError("grid test function needs increasing nodes and matching values")
        if not np.all(np.isfinite(vals)):
            raise UnboundedTestFunctionError("grid values must be finite")
        return cls(
            "grid",
            fn=lambda w: np.interp(w, xs, vals),
            bound=float(np.max(np.abs(vals))),
            meta={"nodes": xs, "values": vals},
        )

    # evaluation -------------------------------------------------------

    @property
    def is_step(self) -> bool:
        return self.kind in STEP_KINDS

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return self.breaks

    def __call__(self, w):
        w = np.asarray(w, dtype=float)
        if self.is_step:
            idx = np.searchsorted(np.asarray(self.breaks), w, side="left")
            return np.asarray(self.values)[idx]
        return np.asarray(self.fn(w), dtype=float) * np.ones_like(w)

    def limits_at(self, b: float) -> tuple[float, float]:
        """One-sided values (h(b-), h(b+))."""
        return float(self(np.nextafter(b, -math.inf))), float(self(np.nextafter(b, math.inf)))

    def scan_bound(self, xs=None) -> float:
        """Sup-norm measured by scanning; step kinds are exact."""
        if self.is_step:
            return max(abs(v) for v in self.values)
        xs = np.linspace(-12, 12, 4801) if xs is None else np.asarray(xs, dtype=float)
        return float(np.max(np.abs(self(xs))))

    def scaled(self, a: float) -> "TestFunction":
        if self.is_step:
            return TestFunction(self.kind, self.breaks, tuple(a * v for v in self.values), meta=dict(self.meta))
        fn = self.fn
        return TestFunction.smooth(lambda w: a * fn(w), abs(a) * self.bound)

    def plus(self, other: "TestFunction") -> "TestFunction":
        """Pointwise sum."""
        if self.is_step and other.is_step:
            breaks = sorted(set(self.breaks) | set(other.breaks))
            probes = _interval_probes(breaks)
            vals = self(probes) + other(probes)
            return TestFunction.step(breaks, vals)
        f, g = self, other
        return TestFunction.smooth(lambda w: f(w) + g(w), self.bound + other.bound)


def _interval_probes(breaks) -> np.ndarray:
    """One interior point for each interval delimited by ``breaks``."""
    if not breaks:
        return np.array([0.0])
    b = np.asarray(breaks, dtype=float)
    mids = 0.5 * (b[:-1] + b[1:])
    return np.concatenate([[b[0] - 1.0], mids, [b[-1] + 1.0]])
