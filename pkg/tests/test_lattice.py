import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import special

from edgeworth_stein import (
    LatticeDistribution,
    TestFunction,
    bernoulli_component_grouping,
    bezout_coefficients,
    binomial_local_clt_approx,
    binomial_vs_gaussian_expectation,
    lattice_power_pmf,
    support_gcd,
)
from edgeworth_stein.errors import (
    GcdNotOneError,
    SingletonSupportError,
    TestFunctionNotCellConstantError,
    XNotInLatticeError,
    XOutsideWindowError,
)
from edgeworth_stein.lattice import local_clt_window, max_local_clt_error, midpoint_sup_gap

from conftest import brute_force_sum_pmf


@pytest.mark.parametrize("support,g", [((0, 2, 3), 1), ((0, 4, 8), 4), ((5, 8, 11), 3), ((-3, 7), 10)])
def test_support_gcd(support, g):
    assert support_gcd(support) == g


@given(st.lists(st.integers(-100, 100), min_size=2, max_size=6, unique=True), st.integers(-1000, 1000))
def test_support_gcd_shift_invariant(support, c):
    support = sorted(support)
    assert support_gcd(support) == support_gcd([s + c for s in support])


def test_singleton_support():
    with pytest.raises(SingletonSupportError):
        support_gcd([4])


@pytest.mark.parametrize(
    "offsets,coef", [((2, 3), (-1, 1)), ((3, 5), (2, -1)), ((6, 10, 15), (1, 1, -1)), ((1,), (1,))]
)
def test_bezout_examples(offsets, coef):
    assert bezout_coefficients(offsets) == coef


def test_bezout_minimal_l1_by_exhaustive_search():
    offsets = (6, 10, 15)
    best = min(
        sum(map(abs, c))
        for c in itertools.product(range(-6, 7), repeat=3)
        if sum(a * b for a, b in zip(c, offsets)) == 1
    )
    assert best == 3
    assert sum(map(abs, bezout_coefficients(offsets))) == best


def test_bezout_gcd_not_one():
    with pytest.raises(GcdNotOneError):
        bezout_coefficients((4, 6))
    with pytest.raises(GcdNotOneError):
        bernoulli_component_grouping(LatticeDistribution((0, 4, 8), (0.3, 0.3, 0.4)))


def test_grouping_uniform_023():
    cert = bernoulli_component_grouping(LatticeDistribution.uniform((0, 2, 3)))
    assert cert.group_size == 2 and cert.shift == 2
    brute = brute_force_sum_pmf(LatticeDistribution.uniform((0, 2, 3)), 2)
    assert brute[2] == pytest.approx(2 / 9, abs=1e-15) and brute[3] == pytest.approx(2 / 9, abs=1e-15)
    assert cert.weight == pytest.approx(4 / 9, abs=1e-15)
    assert cert.as_dict() == {"offsets": [2, 3], "coefficients": [-1, 1], "m": 2, "z": 2, "weight": cert.weight}


def test_grouping_bernoulli_half():
    cert = bernoulli_component_grouping(LatticeDistribution.bernoulli(0.5))
    assert (cert.group_size, cert.shift, cert.weight) == (1, 0, 1.0)


def test_grouping_035():
    dist = LatticeDistribution.uniform((0, 3, 5))
    cert = bernoulli_component_grouping(dist)
    assert cert.group_size == 3
    brute = brute_force_sum_pmf(dist, 3)
    best = max(min(brute.get(k, 0), brute.get(k + 1, 0)) for k in range(16))
    assert best > 0
    assert cert.weight == pytest.approx(2 * best, abs=1e-15)
    assert cert.masses == pytest.approx((brute[cert.shift], brute[cert.shift + 1]), abs=1e-15)


def random_supports(count, seed=20240):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        size = int(rng.integers(2, 6))
        offsets = sorted(rng.choice(np.arange(1, 31), size=size - 1, replace=False).tolist())
        if math.gcd(*offsets) != 1:
            continue
        s0 = int(rng.integers(-10, 11))
        weights = [Fraction(int(w)) for w in rng.integers(1, 20, size=size)]
        total = sum(weights)
        probs = tuple(float(w / total) for w in weights)
        out.append(LatticeDistribution(tuple([s0] + [s0 + d for d in offsets]), probs))
    return out


@pytest.mark.parametrize("dist", random_supports(200))
def test_random_certificates(dist):
    cert = bernoulli_component_grouping(dist)
    assert sum(c * d for c, d in zip(cert.coefficients, cert.offsets)) == 1
    assert all(c != 0 for c in cert.coefficients)
    assert cert.group_size == sum(abs(c) for c in cert.coefficients)
    assert cert.weight > 0
    pmf = lattice_power_pmf(dist, cert.group_size).as_dict()
    assert pmf[cert.shift] == cert.masses[0] > 0
    assert pmf[cert.shift + 1] == cert.masses[1] > 0
    assert cert.weight == 2 * min(cert.masses)


# local CLT -------------------------------------------------------------------------

def test_local_clt_examples():
    r = binomial_local_clt_approx(100, 0.0)
    assert r.exact == pytest.approx(math.comb(100, 50) / 2**100, rel=1e-13)
    assert r.exact == pytest.approx(0.0795892, abs=1e-7)
    assert r.approx == pytest.approx(0.0797885, abs=1e-7)
    r4 = binomial_local_clt_approx(4, 0.0)
    assert r4.exact == 0.375 and r4.approx == pytest.approx(2 / math.sqrt(8 * math.pi), rel=1e-15)
    assert binomial_local_clt_approx(1024, 0.0).scaled_error <= 5


def test_local_clt_log_gamma_path():
    for n, z in ((100, 49), (1024, 520), (4096, 2050)):
        exact = Fraction(math.comb(n, z), 2**n)
        x = 2 * z / math.sqrt(n) - math.sqrt(n)
        assert binomial_local_clt_approx(n, x).exact == pytest.approx(float(exact), rel=1e-12)


def test_local_clt_errors():
    with pytest.raises(XNotInLatticeError):
        binomial_local_clt_approx(100, 0.1)
    with pytest.raises(XOutsideWindowError):
        binomial_local_clt_approx(100, 0.4)


def test_local_clt_bounded():
    vals = [max_local_clt_error(n) for n in (64, 256, 1024, 4096)]
    assert max(vals) <= 5
    # converges to the constant 1/4 from below
    assert vals[-1] <= 0.25
    assert all(len(local_clt_window(n)) >= 1 for n in (64, 256, 1024, 4096))


# binomial vs gaussian ----------------------------------------------------------------

def test_binomial_vs_gaussian_constant():
    assert binomial_vs_gaussian_expectation(16, TestFunction.constant(1.0))[2] == pytest.approx(0.0, abs=1e-15)


def test_binomial_vs_gaussian_l16():
    lhs, rhs, gap = binomial_vs_gaussian_expectation(16, TestFunction.indicator(8.5))
    exact = Fraction(sum(math.comb(16, k) for k in range(9)), 2**16)
    assert lhs == pytest.approx(float(exact), abs=1e-15)
    assert lhs == pytest.approx(0.598190, abs=1e-6)
    assert rhs == pytest.approx(special.ndtr(0.25), abs=1e-15)
    assert rhs == pytest.approx(0.598706, abs=1e-6)
    assert gap == pytest.approx(lhs - rhs, abs=1e-15)


def test_binomial_vs_gaussian_general_cells():
    rng = np.random.default_rng(3)
    vals = rng.uniform(-1, 1, size=21)
    h = TestFunction.cell_constant(np.arange(21), 1.0, vals)
    lhs, rhs, _ = binomial_vs_gaussian_expectation(20, h)
    pmf = [math.comb(20, k) / 2**20 for k in range(21)]
    assert lhs == pytest.approx(sum(p * v for p, v in zip(pmf, vals)), abs=1e-14)
    cells = special.ndtr((np.arange(21) + 0.5 - 10) / math.sqrt(5)) - special.ndtr((np.arange(21) - 0.5 - 10) / math.sqrt(5))
    assert rhs == pytest.approx(float(np.dot(cells, vals)), abs=1e-12)


def test_binomial_vs_gaussian_rejects_non_cell():
    with pytest.raises(TestFunctionNotCellConstantError):
        binomial_vs_gaussian_expectation(16, TestFunction.indicator(8.2))
    with pytest.raises(TestFunctionNotCellConstantError):
        binomial_vs_gaussian_expectation(16, TestFunction.smooth(np.sin, 1.0))


def test_midpoint_sweep_bounded():
    scaled = [l * midpoint_sup_gap(l) for l in (16, 64, 256, 1024)]
    assert max(scaled) / min(scaled) <= 10
