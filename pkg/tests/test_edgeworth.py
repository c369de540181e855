import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special

from edgeworth_stein import (
    LatticeDistribution,
    TestFunction,
    cellify_test_function,
    compute_moments,
    edgeworth_cdf_value,
    expand_expectation,
    gamma_sum_cdf,
    hermite_correction_functional,
)
from edgeworth_stein.distributions import MomentSummary
from edgeworth_stein.edgeworth import lattice_cell_function

PHI0 = 1 / math.sqrt(2 * math.pi)


def hermite_by_quad(x):
    f = lambda y: (y**3 - 3 * y) * math.exp(-y * y / 2) / math.sqrt(2 * math.pi)
    return integrate.quad(f, -np.inf, x, epsabs=1e-13, epsrel=1e-12)[0]


def test_hermite_trivial_and_indicator():
    assert hermite_correction_functional(TestFunction.constant(1.0)) == pytest.approx(0.0, abs=1e-15)
    assert hermite_correction_functional(TestFunction.indicator(0.0)) == pytest.approx(PHI0, abs=1e-15)
    assert hermite_by_quad(0.0) == pytest.approx(0.398942, abs=1e-6)


def test_hermite_sign():
    val = hermite_correction_functional(TestFunction.sign())
    assert val == pytest.approx(-2 * PHI0, abs=1e-15)
    assert val == pytest.approx(-0.797885, abs=1e-6)


@pytest.mark.parametrize("x", np.arange(-4, 4.0001, 0.25))
def test_hermite_indicator_closed_form_vs_quadrature(x):
    closed = (1 - x * x) * math.exp(-x * x / 2) * PHI0
    assert hermite_correction_functional(TestFunction.indicator(x)) == pytest.approx(closed, abs=1e-15)
    assert abs(hermite_by_quad(x) - closed) <= 1e-10


def test_hermite_smooth_uses_quadrature():
    h = TestFunction.smooth(np.tanh, 1.0)
    oracle = integrate.quad(lambda y: (y**3 - 3 * y) * math.tanh(y) * math.exp(-y * y / 2) * PHI0, -np.inf, np.inf)[0]
    assert hermite_correction_functional(h) == pytest.approx(oracle, abs=1e-10)


def test_cdf_values():
    assert edgeworth_cdf_value(0.0, 0.0, 25) == 0.5
    assert edgeworth_cdf_value(1.0, 5.0, 10) == pytest.approx(special.ndtr(1.0), abs=1e-15)
    assert edgeworth_cdf_value(1.0, 5.0, 10) == pytest.approx(0.841345, abs=1e-6)
    v = edgeworth_cdf_value(0.0, 2.0, 100)
    assert v == pytest.approx(0.5 + 2 * PHI0 / 60, abs=1e-15)
    assert v == pytest.approx(0.513298, abs=1e-6)
    assert abs(v - gamma_sum_cdf(100, 0.0).value) <= 3e-3


def test_cdf_value_not_clamped():
    # large negative skewness pushes the expansion below 0 near x = -1.5 for tiny n
    v = edgeworth_cdf_value(-3.0, 40.0, 1)
    assert v < 0.0


@given(st.floats(-8, 8), st.floats(-5, 5), st.integers(1, 10**6))
def test_cdf_converges_to_normal(x, gamma, n):
    diff = abs(edgeworth_cdf_value(x, gamma, n) - special.ndtr(x))
    assert diff <= abs(gamma) * 0.4 / (6 * math.sqrt(n)) + 1e-15


def test_cdf_vectorised():
    x = np.linspace(-3, 3, 7)
    v = edgeworth_cdf_value(x, 1.0, 9)
    assert v.shape == x.shape
    assert v[3] == 0.5 + PHI0 / 18


def test_expand_examples(bern03):
    est = expand_expectation(TestFunction.indicator(0.0), MomentSummary(0.0, 1.0, 0.0, 3.0), 16)
    assert (est.base, est.correction, est.total) == (0.5, 0.0, 0.5)
    m = compute_moments(bern03)
    est = expand_expectation(TestFunction.indicator(0.0), m, 100)
    assert est.correction == pytest.approx(m.skewness * PHI0 / 60, rel=1e-14)
    assert est.correction == pytest.approx(0.005803, abs=1e-6)
    assert est.total == est.base + est.correction
    one = expand_expectation(TestFunction.constant(1.0), m, 7)
    assert one.total == pytest.approx(1.0, abs=1e-15)


def test_correction_envelope(bern03):
    m = compute_moments(bern03)
    for h in (TestFunction.sign(), TestFunction.indicator(-0.7), TestFunction.step((0.0, 1.0), (1.0, -1.0, 0.5))):
        est = expand_expectation(h, m, 25)
        e_abs = 2 * integrate.quad(lambda z: abs(z**3 - 3 * z) * math.exp(-z * z / 2) * PHI0, 0, np.inf)[0]
        assert abs(est.correction) <= abs(m.skewness) * e_abs * h.scan_bound() / 30 + 1e-15


@settings(max_examples=30, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.integers(1, 500))
def test_expand_linear_in_h(a, b, n):
    m = MomentSummary(0.1, 2.0, 0.7, 4.0)
    h1 = TestFunction.smooth(np.sin, 1.0)
    h2 = TestFunction.smooth(lambda w: np.exp(-w * w), 1.0)
    comb = TestFunction.smooth(lambda w: a * np.sin(w) + b * np.exp(-w * w), abs(a) + abs(b))
    e1, e2, e = (expand_expectation(h, m, n) for h in (h1, h2, comb))
    for attr in ("base", "correction", "total"):
        assert getattr(e, attr) == pytest.approx(a * getattr(e1, attr) + b * getattr(e2, attr), abs=1e-13)


def test_cellify_examples(bern03):
    # Bernoulli(1/2), n = 4: W = (S - 2) / 1
    assert cellify_test_function(0.3, 0.5, 4, 2.0).meta["threshold"] == 0.5
    assert cellify_test_function(-0.4, 0.5, 4, 2.0).meta["threshold"] == -0.5
    # Bernoulli(0.3), n = 9: support points of W bracketing 0 are (2-2.7)/s and (3-2.7)/s
    scale = 3 * math.sqrt(0.21)
    support = (np.arange(10) - 2.7) / scale
    lo = support[support <= 0].max()
    hi = support[support > 0].min()
    t = cellify_test_function(0.0, math.sqrt(0.21), 9, 2.7).meta["threshold"]
    assert t == pytest.approx((lo + hi) / 2, abs=1e-15)
    assert t == pytest.approx(-0.145479, abs=1e-6)


@given(st.floats(-6, 6), st.floats(0.1, 3), st.integers(1, 400), st.floats(-50, 50))
def test_cellify_idempotent(x, sigma, n, shift):
    t1 = cellify_test_function(x, sigma, n, shift).meta["threshold"]
    t2 = cellify_test_function(t1, sigma, n, shift).meta["threshold"]
    assert t2 == pytest.approx(t1, abs=1e-12)
    # the snapped threshold sits halfway between two lattice points of W
    raw = t1 * sigma * math.sqrt(n) + shift
    assert abs(raw - math.floor(raw) - 0.5) < 1e-8


def test_cellified_indicator_is_constant_on_cells():
    scale = 0.5 * 2
    h = cellify_test_function(0.3, 0.5, 4, 2.0)
    pts = np.arange(-2, 3) / scale
    for z in pts:
        inner = np.linspace(z - 0.499, z + 0.499, 11)
        assert np.unique(h(inner)).size == 1


def test_lattice_cell_function_random_values():
    rng = np.random.default_rng(7)
    vals = rng.uniform(-1, 1, size=5)
    h = lattice_cell_function(vals, 0, 0.5, 4, 2.0)
    w = (np.arange(5) - 2.0) / 1.0
    assert np.allclose(h(w), vals)
    assert np.allclose(h(w + 0.3), vals)
