"""Command line entry point.

Exit codes: 0 success, 2 validation error, 3 failed threshold under --assert.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import config as cfgmod
from .distributions import GaussianMixturePair, GridDensity, LatticeDistribution, compute_moments, standardize_params
from .edgeworth import cellify_test_function, expand_expectation
from .errors import ValidationError
from .experiment import ExperimentConfig, emit_report, format_report, run_rate_experiment
from .kernel import kernel_from_density, kernel_gaussian_mixture
from .lattice import bernoulli_component_grouping, support_gcd
from .oracle import ExponentialSummands, gamma_sum_cdf, lattice_power_pmf
from .stein_equation import second_solution_expectation_identity, solve_stein_first, stein_norm_bounds
from .testfunctions import TestFunction

EXIT_OK, EXIT_INVALID, EXIT_ASSERT = 0, 2, 3


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _on_off(text: str) -> bool:
    if text not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected 'on' or 'off'")
    return text == "on"


def _distribution(args):
    if args.dist is not None:
        try:
            obj = json.loads(args.dist)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"--dist is not valid JSON: {exc}") from exc
        return cfgmod.load_distribution(obj)
    if args.config is None:
        raise ValidationError("a distribution is required (--config or --dist)")
    data = cfgmod.read_json(args.config)
    if "distribution" in data:
        data = data["distribution"]
    return cfgmod.load_distribution(data, _parent(args.config))


def _parent(path):
    from pathlib import Path

    return Path(path).parent


def _num(v) -> str:
    """Shortest round-trip text for a number (numpy scalars included)."""
    return repr(float(v))


def _write(text: str, out):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def cmd_expand(args) -> int:
    dist = _distribution(args)
    m = compute_moments(dist)
    ns = args.n or [100]
    xs = args.x or [0.0]
    lines = ["n,x,threshold,base,correction,total"]
    for n in ns:
        for x in xs:
            if isinstance(dist, LatticeDistribution) and not args.no_cellify:
                shift, _ = standardize_params(m, n)
                h = cellify_test_function(x, m.sigma, n, shift)
            else:
                h = TestFunction.indicator(x)
            est = expand_expectation(h, m, n)
            thr = h.breaks[0]
            lines.append(",".join([str(n), *map(_num, (x, thr, est.base, est.correction, est.total))]))
    _write("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_kernel(args) -> int:
    dist = _distribution(args)
    if isinstance(dist, GridDensity):
        k = kernel_from_density(dist)
        x, tau, dens = k.nodes, k.values, dist.values
    elif isinstance(dist, GaussianMixturePair):
        k = kernel_gaussian_mixture(dist)
        m = compute_moments(dist)
        x = np.linspace(m.mean - 6 * m.sigma, m.mean + 6 * m.sigma, args.points)
        tau, dens = k(x), dist.pdf(x)
    else:
        raise ValidationError("kernel needs a grid-density or gaussian-mixture distribution")
    lines = ["x,tau,density"] + [",".join(map(_num, row)) for row in zip(x, tau, dens)]
    _write("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_stein_check(args) -> int:
    xs = args.x if args.x is not None else [float(v) for v in range(-3, 4)]
    lines = ["id,f_sup,f_bound,fprime_sup,fprime_bound,identity_gap"]
    ok = True
    for x in xs:
        h = TestFunction.indicator(x)
        f_sup, fp_sup = solve_stein_first(h).sup_norms()
        f_bound, fp_bound = stein_norm_bounds(h)
        _, _, gap = second_solution_expectation_identity(h)
        ok &= f_sup <= f_bound * (1 + 1e-6) and fp_sup <= fp_bound * (1 + 1e-6) and gap <= 1e-6
        lines.append(",".join([f"indicator({_num(x)})", *map(_num, (f_sup, f_bound, fp_sup, fp_bound, gap))]))
    _write("\n".join(lines) + "\n", args.out)
    return EXIT_ASSERT if args.assert_ and not ok else EXIT_OK


def cmd_oracle(args) -> int:
    if args.gamma is not None:
        n, x = args.gamma
        if not float(n).is_integer() or n < 1:
            raise ValidationError("--gamma needs a positive integer n")
        _write(_num(gamma_sum_cdf(int(n), x).value) + "\n", args.out)
        return EXIT_OK
    dist = _distribution(args)
    if not isinstance(dist, LatticeDistribution):
        raise ValidationError("oracle pmf dump needs a lattice distribution")
    ns = args.n or [1]
    if len(ns) != 1:
        raise ValidationError("oracle takes a single --n")
    pmf = lattice_power_pmf(dist, ns[0])
    lines = ["k,prob"] + [f"{int(k)},{_num(p)}" for k, p in zip(pmf.values, pmf.probs)]
    _write("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_bezout(args) -> int:
    if args.support is not None:
        support = args.support
        probs = args.probs or [1.0 / len(support)] * len(support)
        dist = LatticeDistribution(tuple(support), tuple(probs))
    else:
        dist = _distribution(args)
        if not isinstance(dist, LatticeDistribution):
            raise ValidationError("bezout needs a lattice distribution")
    support_gcd(dist.support)
    cert = bernoulli_component_grouping(dist)
    _write(json.dumps(cert.as_dict()) + "\n", args.out)
    return EXIT_OK


def cmd_rate(args) -> int:
    data = cfgmod.read_json(args.config) if args.config else {}
    if args.dist is not None or "distribution" not in data:
        dist = _distribution(args)
    else:
        dist = cfgmod.load_distribution(data["distribution"], _parent(args.config))
    thresholds = data.get("thresholds", {})
    correction = args.correction if args.correction is not None else _on_off(str(data.get("correction", "on")))
    xs = data.get("evaluation", {}).get("xs")
    cfg = ExperimentConfig(
        distribution=dist,
        ns=args.n or data.get("n"),
        correction=correction,
        xs=tuple(xs) if xs else None,
        output=args.out or data.get("output"),
        seed=args.seed if args.seed is not None else int(data.get("seed", 0)),
        samples=int(data.get("samples", 200_000)),
        slope_on_max=float(thresholds.get("on_max", -0.9)),
        slope_off_range=tuple(thresholds.get("off_range", (-0.6, -0.4))),
    )
    report = run_rate_experiment(cfg)
    if cfg.output:
        emit_report(report, cfg.output)
    else:
        sys.stdout.write(format_report(report))
    if args.assert_ and not cfg.slope_passes(report.slope):
        print(f"slope {report.slope:.4f} fails threshold", file=sys.stderr)
        return EXIT_ASSERT
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--dist", help="inline JSON distribution object")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--seed", type=int, help="Monte Carlo seed")
    common.add_argument("--n", type=_int_list, help="comma-separated sample sizes")
    common.add_argument("--correction", type=_on_off, help="Edgeworth correction on|off")
    common.add_argument("--assert", dest="assert_", action="store_true", help="exit 3 when a threshold fails")

    parser = argparse.ArgumentParser(prog="edgeworth-stein", description="Two-term Edgeworth expansions, Stein kernels and exact oracles.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("expand", parents=[common], help="two-term expansion of P(W <= x)")
    p.add_argument("--x", type=_float_list, help="comma-separated thresholds")
    p.add_argument("--no-cellify", action="store_true", help="do not snap lattice thresholds to midpoints")
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("kernel", parents=[common], help="Stein kernel on a grid as CSV")
    p.add_argument("--points", type=int, default=1201)
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("stein-check", parents=[common], help="Stein solution bounds and identity gaps")
    p.add_argument("--x", type=_float_list, help="indicator thresholds (default -3..3)")
    p.set_defaults(func=cmd_stein_check)

    p = sub.add_parser("oracle", parents=[common], help="exact pmf of a lattice sum, or the gamma CDF")
    p.add_argument("--gamma", nargs=2, type=float, metavar=("N", "X"))
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("bezout", parents=[common], help="Bernoulli-component certificate as JSON")
    p.add_argument("--support", type=_int_list)
    p.add_argument("--probs", type=_float_list)
    p.set_defaults(func=cmd_bezout)

    p = sub.add_parser("rate", parents=[common], help="rate-certification experiment")
    p.set_defaults(func=cmd_rate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
