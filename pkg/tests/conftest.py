import math

import numpy as np
import pytest

from edgeworth_stein import GaussianMixturePair, LatticeDistribution, preset_density


@pytest.fixture(scope="session")
def uniform_density():
    return preset_density("uniform")


@pytest.fixture
def bern03():
    return LatticeDistribution.bernoulli(0.3)


MIXTURES = [
    GaussianMixturePair(0.5, 0.0, 1.0, 0.0, 4.0),
    GaussianMixturePair(0.5, 0.0, 1.0, 1.0, 1.0),
    GaussianMixturePair(0.3, -1.0, 0.5, 2.0, 1.5),
]


def brute_force_sum_pmf(dist, n):
    """pmf of S_n by enumerating all |support|^n outcomes."""
    import itertools

    out = {}
    for combo in itertools.product(range(len(dist.support)), repeat=n):
        s = sum(dist.support[i] for i in combo)
        out[s] = out.get(s, 0.0) + math.prod(dist.probs[i] for i in combo)
    return out


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
