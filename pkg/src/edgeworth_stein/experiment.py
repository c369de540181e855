"""Rate-certification experiments and their CSV reports."""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .distributions import GaussianMixturePair, GridDensity, LatticeDistribution, TwoPartMixture, compute_moments
from .errors import InsufficientPointsError, ValidationError
from .oracle import ExponentialSummands, monte_carlo_sup_deviation, sup_deviation

LATTICE_NS = tuple(2**k for k in range(4, 11))
GAMMA_NS = tuple(2**k for k in range(4, 13))
MC_STDERR_RATIO = 5.0
REPORT_HEADER = "n,sup_error,argmax_x,n_times_error,stderr,method"


@dataclass
class ExperimentConfig:
    distribution: object
    ns: tuple[int, ...] | None = None
    correction: bool = True
    xs: tuple[float, ...] | None = None
    output: str | None = None
    seed: int = 0
    samples: int = 200_000
    slope_on_max: float = -0.9
    slope_off_range: tuple[float, float] = (-0.6, -0.4)
    workers: int = 1

    def __post_init__(self):
        if self.ns is None:
            self.ns = GAMMA_NS if isinstance(self.distribution, ExponentialSummands) else LATTICE_NS
        self.ns = tuple(int(n) for n in self.ns)
        if any(n < 1 for n in self.ns):
            raise ValidationError("n values must be positive integers")
        if list(self.ns) != sorted(set(self.ns)):
            raise ValidationError("n list must be strictly ascending")
        if len(self.ns) < 3:
            raise InsufficientPointsError("slope fitting needs at least three n values")

    @property
    def skewness(self) -> float:
        if isinstance(self.distribution, ExponentialSummands):
            return self.distribution.skewness
        return compute_moments(self.distribution).skewness

    def slope_passes(self, slope: float) -> bool:
        """Default thresholds: <= -0.9 when corrected or symmetric, else within the off range."""
        if self.correction or abs(self.skewness) < 1e-12:
            return slope <= self.slope_on_max
        lo, hi = self.slope_off_range
        return lo <= slope <= hi


@dataclass(frozen=True)
class RateRow:
    n: int
    sup_error: float
    argmax_x: float
    stderr: float
    method: str

    @property
    def n_times_error(self) -> float:
        return self.n * self.sup_error


@dataclass
class RateReport:
    rows: list[RateRow]
    slope: float
    intercept: float
    residual: float
    fitted_ns: tuple[int, ...] = field(default_factory=tuple)

    @property
    def n_error_ratio(self) -> float:
        vals = [r.n_times_error for r in self.rows]
        return max(vals) / min(vals)


def fit_loglog_slope(points) -> tuple[float, float, float]:
    """Least-squares line through (log n, log error); returns (slope, intercept, rms residual)."""
    pts = [(float(n), float(e)) for n, e in points]
    bad = [p for p in pts if not p[1] > 0]
    if bad:
        warnings.warn(f"dropping {len(bad)} non-positive errors from the slope fit", stacklevel=2)
    pts = [p for p in pts if p[1] > 0]
    if len(pts) < 3:
        raise InsufficientPointsError("need at least three points with positive error")
    x = np.log([p[0] for p in pts])
    y = np.log([p[1] for p in pts])
    A = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + intercept)
    return float(slope), float(intercept), float(math.sqrt(np.mean(resid**2)))


def _row(cfg: ExperimentConfig, n: int) -> RateRow:
    dist = cfg.distribution
    if isinstance(dist, (LatticeDistribution, ExponentialSummands)):
        err, arg = sup_deviation(dist, n, cfg.correction, cfg.xs)
        method = "exact-convolution" if isinstance(dist, LatticeDistribution) else "gamma-closed-form"
        return RateRow(n, err, arg, 0.0, method)
    if isinstance(dist, (GridDensity, TwoPartMixture, GaussianMixturePair)):
        err, arg, se = monte_carlo_sup_deviation(dist, n, cfg.correction, cfg.samples, cfg.seed + n, cfg.xs)
        return RateRow(n, err, arg, se, "monte-carlo")
    raise ValidationError(f"no oracle for {type(dist).__name__}")


def run_rate_experiment(cfg: ExperimentConfig) -> RateReport:
    """One sup-error row per n, then a log-log fit over the trustworthy rows.

    Monte Carlo rows enter the fit only when their standard error is at least
    five times below the measured error.  Monte Carlo row n uses seed
    ``cfg.seed + n``.
    """
    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            rows = list(pool.map(lambda n: _row(cfg, n), cfg.ns))
    else:
        rows = [_row(cfg, n) for n in cfg.ns]
    rows.sort(key=lambda r: r.n)
    fitted = [r for r in rows if r.method != "monte-carlo" or r.stderr * MC_STDERR_RATIO <= r.sup_error]
    slope, intercept, resid = fit_loglog_slope([(r.n, r.sup_error) for r in fitted])
    return RateReport(rows, slope, intercept, resid, tuple(r.n for r in fitted))


def format_report(r: RateReport) -> str:
    if not r.rows:
        raise InsufficientPointsError("report has no rows")
    lines = [REPORT_HEADER]
    for row in r.rows:
        lines.append(",".join([
            str(row.n), *(repr(float(v)) for v in (row.sup_error, row.argmax_x, row.n_times_error, row.stderr)),
            row.method,
        ]))
    lines.append(f"# slope={float(r.slope)!r} intercept={float(r.intercept)!r}")
    return "\n".join(lines) + "\n"


def emit_report(r: RateReport, path) -> None:
    text = format_report(r)
    with open(path, "w", newline="") as fh:
        fh.write(text)
