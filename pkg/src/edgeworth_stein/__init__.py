"""Two-term Edgeworth expansions, Stein kernels and Stein-equation solutions,
with exact oracles for certifying O(1/n) error rates."""

from .distributions import (
    ExponentialSummands,
    GaussianMixturePair,
    GridDensity,
    LatticeDistribution,
    MomentSummary,
    TwoPartMixture,
    compute_moments,
    preset_density,
    standardize_params,
)
from .edgeworth import (
    ExpansionEstimate,
    cellify_test_function,
    edgeworth_cdf_value,
    expand_expectation,
    hermite_correction_functional,
)
from .experiment import ExperimentConfig, RateReport, emit_report, fit_loglog_slope, run_rate_experiment
from .kernel import (
    KernelFunction,
    check_kernel_identity,
    kernel_from_density,
    kernel_gaussian_mixture,
    kernel_stats,
)
from .lattice import (
    BezoutCertificate,
    bernoulli_component_grouping,
    bezout_coefficients,
    binomial_local_clt_approx,
    binomial_vs_gaussian_expectation,
    support_gcd,
)
from .oracle import (
    OracleResult,
    PmfVector,
    gamma_sum_cdf,
    lattice_expectation,
    lattice_power_pmf,
    monte_carlo_expectation,
    sup_deviation,
)
from .stein_equation import (
    SolutionFunction,
    gaussian_smooth,
    second_solution_expectation_identity,
    solve_stein_first,
    solve_stein_second,
)
from .testfunctions import TestFunction

__version__ = "0.1.0"
