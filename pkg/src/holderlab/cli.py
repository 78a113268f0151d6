"""Command line runner: one experiment per invocation.

Exit codes: 0 success, 1 failed check, 2 configuration error, 3 numerical
error.
"""
import argparse
import logging
import sys
import time
from pathlib import Path

import numpy as np

from .config import load_config
from .errors import (
    ConfigurationError,
    DomainError,
    NumericalError,
    ResourceError,
    UnsupportedOperationError,
)
from .kernels import GridSpec, load_or_build_table, u_eval, u_reference, zero_constant
from .lab import (
    dispersion_check,
    energy_trace,
    holder_profile,
    iterate_measures,
    local_dimension_trace,
    moment_table,
    scale_threshold_check,
    stationary_estimate,
    theta_equivariance_check,
    variance_identity_check,
)
from .reporting import write_report

__all__ = ["run", "main", "SUBCOMMANDS", "EXIT_OK", "EXIT_CHECK_FAILED", "EXIT_CONFIG", "EXIT_NUMERICAL"]

log = logging.getLogger("holderlab")

EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3
KERNEL_ZERO_TOL = 1e-6


class _Run:
    """State shared by the subcommand handlers."""

    def __init__(self, cfg, out_dir, base_dir):
        self.cfg = cfg
        self.out = Path(out_dir)
        self.base_dir = base_dir
        self.started = time.perf_counter()

    def report(self, name, rows, header=None, **extra):
        path = write_report(self.out, name, rows, self.cfg.to_dict(), self.cfg.seed, self.started, header, **extra)
        log.info("wrote %s", path)
        return path

    def table(self):
        c = self.cfg
        return load_or_build_table(c.alpha, c.k, GridSpec(n=c.table_points), cache_dir=c.cache_dir,
                                   workers=c.workers)[0]

    def simulate(self, mu=None):
        c = self.cfg
        mu = mu or c.distribution_spec()
        return stationary_estimate(mu, c.initial(self.base_dir), c.steps, c.mode, c.cesaro, c.seed, c.particles)


def _kernel_table(run):
    table = run.table()
    run.report("kernel_table", table.to_rows(), u_zero=table.u_zero, c_alpha=table.c_alpha,
               c_alpha_prime=table.c_alpha_prime, alpha=table.alpha, k=table.k)
    return EXIT_OK


def _kernel_check(run):
    c = run.cfg
    params = c.kernel_params()
    expected = zero_constant(c.k) / c.alpha * c.epsilon ** (-c.alpha)
    reference = float(u_reference(params, 0.0))
    tabled = float(u_eval(run.table(), c.epsilon, 0.0))
    rows = []
    ok = True
    for name, value in (("u_reference_zero", reference), ("u_eval_zero", tabled)):
        err = abs(value - expected) / expected
        passed = err <= KERNEL_ZERO_TOL
        ok &= passed
        rows.append((name, c.k, c.alpha, c.epsilon, value, expected, err, KERNEL_ZERO_TOL, passed))
    run.report("kernel_check", rows)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def _measure_report(run, nu, **extra):
    m = nu.merged()
    name = "measure"
    header = m.csv_header()
    run.report(name, m.to_rows(), header=header, atoms=len(m), **extra)


def _simulate(run):
    _measure_report(run, run.simulate())
    return EXIT_OK


def _energy_trace(run, keep=False):
    c = run.cfg
    tr = energy_trace(c.distribution_spec(), c.initial(run.base_dir), run.table(), c.epsilon, c.steps, c.mode,
                      c.seed, c.particles, keep_measures=keep)
    run.report("energy_trace", [(j, v, m) for j, v, m in tr.to_rows()])
    run.report("energy_fit", [(tr.lam, tr.C_tilde, tr.kappa, tr.fit_window[0], tr.fit_window[1], tr.converged)])
    return tr


def _energy(run):
    tr = _energy_trace(run)
    return EXIT_OK if tr.converged else EXIT_CHECK_FAILED


def _holder(run):
    c = run.cfg
    nu = run.simulate()
    diam = nu.space.diameter
    scales = c.scales if c.scales is not None else np.geomspace(0.01, 0.25, 16) * diam
    prof = holder_profile(nu, scales, c.centers or "atoms+grid")
    run.report("holder_profile", prof.to_rows())
    run.report("holder_fit", [(prof.alpha_hat, prof.C_hat, prof.degenerate)])
    return EXIT_OK


def _threshold(run):
    c = run.cfg
    mu = c.distribution_spec()
    if c.calibrate_step >= c.steps:
        raise ConfigurationError("calibrate_step must be below steps", key="calibrate_step")
    kappa = c.kappa
    if kappa is None:
        tr = _energy_trace(run, keep=True)
        if not tr.converged:
            raise NumericalError("no energy contraction detected, kappa cannot be fitted")
        kappa = tr.kappa
        measures = dict(enumerate(tr.measures))
    else:
        measures = dict(enumerate(iterate_measures(mu, c.initial(run.base_dir), c.steps, c.mode, c.seed,
                                                   c.particles)))
    exponent = c.holder_exponent if c.holder_exponent is not None else c.alpha / 2
    rep = scale_threshold_check(mu, measures[0], exponent, range(c.calibrate_step, c.steps + 1), kappa,
                                C=c.holder_constant, centers=c.centers, measures=measures)
    run.report("threshold", rep.rows, passed=rep.passed, max_ratio=rep.max_residual, **rep.details)
    return EXIT_OK if rep.passed else EXIT_CHECK_FAILED


def _variance(run):
    c = run.cfg
    rep = variance_identity_check(c.distribution_spec(), c.initial(run.base_dir), c.kernel_params(),
                                  c.grid_points or 256)
    d = rep.details
    run.report("variance_check", [(rep.max_residual, rep.threshold, d["variance"], d["te_convolution"],
                                   d["te_average"], d["inequality_holds"], rep.passed)],
               rho_linearity_error=d["rho_linearity_error"])
    return EXIT_OK if rep.passed and d["inequality_holds"] else EXIT_CHECK_FAILED


def _theta(run):
    c = run.cfg
    mu = c.distribution_spec()
    if c.map_index >= len(mu):
        raise ConfigurationError(f"map_index {c.map_index} but the distribution has {len(mu)} maps",
                                 key="map_index")
    rep = theta_equivariance_check(mu.maps[c.map_index], c.initial(run.base_dir), c.kernel_params(),
                                   c.grid_points)
    run.report("theta_check", [(rep.max_residual, rep.threshold, rep.details["lip_constant"],
                                rep.details["grid_points"], rep.passed)])
    return EXIT_OK if rep.passed else EXIT_CHECK_FAILED


def _dispersion(run):
    c = run.cfg
    mu = c.distribution_spec()
    rep = dispersion_check(mu, c.initial(run.base_dir), c.bins)
    rows = [(j, p, v, rep.details["metric"]) for j, (p, v) in enumerate(zip(mu.probabilities,
                                                                               rep.details["per_map"]))]
    run.report("dispersion", rows, dispersion=rep.max_residual)
    return EXIT_OK


def _counterexample(run):
    c = run.cfg
    mu = c.appendix_family()
    n_values = c.n_values or list(range(1, len(mu) + 1))
    rows = local_dimension_trace(mu, n_values, c.k_values, c.particles, c.seed)
    keys = ["n", "k", "center", "half_width", "width", "mass", "floor", "sigma", "ratio", "warning"]
    floor_ok = all(r["mass"] >= r["floor"] - 3 * r["sigma"] for r in rows if not r["warning"])
    ratios = [r["ratio"] for r in rows if r["k"] == c.k_values[0]]
    decreasing = bool(np.all(np.diff(ratios) < 0))
    run.report("local_dimension", [[r[k] for k in keys] for r in rows], floor_ok=floor_ok,
               ratio_decreasing=decreasing)
    mt = moment_table(range(1, c.moment_n_max + 1), c.gamma)
    run.report("moments", [[r[k] for k in ("n_max", "gamma", "moment", "log_moment", "log_moment_limit")]
                           for r in mt])
    return EXIT_OK if floor_ok else EXIT_CHECK_FAILED


SUBCOMMANDS = {
    "kernel-table": _kernel_table,
    "kernel-check": _kernel_check,
    "simulate": _simulate,
    "energy-trace": _energy,
    "holder": _holder,
    "threshold": _threshold,
    "variance-check": _variance,
    "theta-check": _theta,
    "dispersion": _dispersion,
    "counterexample": _counterexample,
}


def run(subcommand, config_path, output=None, seed=None, threads=None) -> int:
    """Run one subcommand and return its exit code."""
    try:
        if subcommand not in SUBCOMMANDS:
            raise ConfigurationError(f"unknown subcommand {subcommand!r}", key="subcommand")
        if seed is not None and not 0 <= int(seed) < 2**64:
            raise ConfigurationError("seed must fit in 64 unsigned bits", key="seed")
        overrides = {"seed": seed, "workers": threads}
        cfg = load_config(config_path, overrides)
        out = Path(output) if output is not None else Path(cfg.output_dir)
        return SUBCOMMANDS[subcommand](_Run(cfg, out, Path(config_path).parent))
    except (ConfigurationError, DomainError, ResourceError, UnsupportedOperationError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, FloatingPointError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="holderlab", description=__doc__.splitlines()[0])
    parser.add_argument("subcommand", choices=sorted(SUBCOMMANDS))
    parser.add_argument("--config", required=True, help="YAML or JSON experiment config")
    parser.add_argument("--output", help="report directory (default: output_dir from the config)")
    parser.add_argument("--seed", type=int, help="64-bit seed, overrides the config")
    parser.add_argument("--threads", type=int, help="worker processes for kernel table builds")
    parser.add_argument("-v", "--verbose", action="store_true")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    return run(args.subcommand, args.config, args.output, args.seed, args.threads)


if __name__ == "__main__":
    sys.exit(main())
