"""Command-line front end.

Subcommands
-----------
bound       solve both bounds for a problem config
sweep-p     sweep the generalized-Gaussian exponent p; six curves as CSV
sweep-ball  sweep the uniform-ball radius R; three curves as CSV
verify      Monte Carlo bracketing check for a chosen prior family
scenario    write a problem config from a sensor-field description

Exit codes: 0 success, 1 config/validation error, 2 solver failure,
3 verification failure.

CSV output uses 15 significant digits, '.' decimal point, ',' separator,
and a mandatory header row; identical inputs produce byte-identical
output. Grid rows are computed concurrently but always emitted in grid
order.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .baselines import cramer_rao_lower, lmmse_upper
from .exceptions import (
    BracketFailure,
    ConfigError,
    FisherUndefined,
    NoConvergence,
    ProblemValidationError,
)
from .mc import mc_weighted_sum
from .priors import (
    Gaussian,
    GeneralizedGaussian,
    PriorSpec,
    UniformBall,
    gen_gauss_covariance,
    gen_gauss_epsilon,
    gen_gauss_fisher,
    uniform_ball_epsilon,
    uniform_ball_moments,
)
from .problem import (
    ChannelEnsemble,
    DivergenceBall,
    GaussianReference,
    load_config,
    save_config,
    validate_problem,
)
from .solver import SolverOptions, local_bounds_weighted, solve_bound

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SOLVER = 2
EXIT_VERIFY = 3

_ORDER_SLACK = 1e-8  # relative slack for the record ordering checks


@dataclass(frozen=True)
class SweepRecord:
    """One sweep row: abscissa (p or R), epsilon, and the bound curves.

    Fields are None where undefined (no Fisher information) or where a
    per-row solver failure left a hole.
    """

    abscissa: float
    epsilon: float
    lower: float | None
    upper: float | None
    local_lower: float | None = None
    local_upper: float | None = None
    lmmse: float | None = None
    cramer_rao: float | None = None

    def check_ordering(self):
        """Raise ValueError when the defined fields violate the orderings
        lower <= lmmse <= upper, local_lower <= lower, upper <= local_upper."""
        def leq(x, y, what):
            if x is not None and y is not None:
                slack = _ORDER_SLACK * max(abs(x), abs(y), 1.0)
                if x > y + slack:
                    raise ValueError(
                        f"ordering violation at abscissa {self.abscissa}: "
                        f"{what} ({x!r} > {y!r})")

        leq(self.lower, self.upper, "lower > upper")
        leq(self.local_lower, self.lower, "local_lower > lower")
        leq(self.upper, self.local_upper, "upper > local_upper")
        leq(self.lower, self.lmmse, "lower > lmmse")
        leq(self.lmmse, self.upper, "lmmse > upper")


@dataclass(frozen=True)
class SensorField:
    """Isotropic power-attenuation scenario: received power at distance d
    is rho_0^2 / (1 + gamma d^m)."""

    distances: tuple[float, ...]
    source_power: float
    decay: float
    exponent: float
    base_noise: float

    def __post_init__(self):
        # d = 0 is allowed: a sensor at the source sees the base noise
        if not self.distances or any(d < 0 for d in self.distances):
            raise ValueError("distances must be nonnegative")
        if self.source_power <= 0 or self.decay <= 0 or self.base_noise <= 0:
            raise ValueError("source power, decay, and base noise must be positive")
        if not 2.0 <= self.exponent <= 3.0:
            raise ValueError("path-loss exponent m must lie in [2, 3]")


def noise_from_distances(field: SensorField, dimension: int,
                         weights=None) -> ChannelEnsemble:
    """Channel ensemble for a sensor field.

    The attenuation model gives received power rho_j^2 = rho_0^2/(1 + gamma
    d_j^m); normalizing each channel to unit gain (Y = X + N) scales the
    noise by rho_0^2/rho_j^2, so Sigma_N_j = sigma_0^2 (1 + gamma d_j^m) I
    and the source power cancels out of the covariances. Weights default
    to 1 for every sensor.
    """
    covs = [field.base_noise * (1.0 + field.decay * d**field.exponent)
            * np.eye(dimension) for d in field.distances]
    if weights is None:
        weights = [1.0] * len(covs)
    if len(weights) != len(covs):
        raise ValueError(f"{len(weights)} weights for {len(covs)} sensors")
    return ChannelEnsemble.from_arrays(covs, weights)


def parse_grid(text: str) -> np.ndarray:
    """Parse 'start:stop:count' or a comma-separated list into a strictly
    increasing positive grid."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"grid must be start:stop:count, got {text!r}")
        try:
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError as exc:
            raise ConfigError(f"bad grid {text!r}: {exc}") from exc
        if count < 1:
            raise ConfigError("grid count must be >= 1")
        grid = np.linspace(start, stop, count)
    else:
        try:
            grid = np.array([float(tok) for tok in text.split(",") if tok.strip()])
        except ValueError as exc:
            raise ConfigError(f"bad grid {text!r}: {exc}") from exc
        if grid.size == 0:
            raise ConfigError("grid is empty")
    if np.any(grid <= 0):
        raise ConfigError("grid values must be positive")
    if grid.size > 1 and np.any(np.diff(grid) <= 0):
        raise ConfigError("grid must be strictly increasing")
    return grid


def _fmt(x) -> str:
    return "" if x is None else "%.15g" % x


def _emit_csv(header, rows, out_path):
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    text = "\n".join(lines) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _solve_or_none(direction, ensemble, ball, opts, label):
    """One bound value; BracketFailure becomes None plus a stderr note."""
    try:
        return solve_bound(direction, ensemble, ball, opts).bound_value
    except BracketFailure as exc:
        print(f"warning: {label}: {exc}", file=sys.stderr)
        return None


def _local_or_none(direction, ensemble, ball, opts, label):
    try:
        return local_bounds_weighted(direction, ensemble, ball, opts)[0]
    except BracketFailure as exc:
        print(f"warning: {label}: {exc}", file=sys.stderr)
        return None


def _sweep_p_row(p, ensemble, mu0, opts) -> SweepRecord:
    k = ensemble.dimension
    sigma0 = gen_gauss_covariance(p, k) * np.eye(k)
    eps = gen_gauss_epsilon(p, k)
    ball = DivergenceBall(GaussianReference(mu0, sigma0), eps)
    prob = validate_problem(ensemble, ball)
    lower = _solve_or_none("lower", prob, ball, opts, f"p={p} lower")
    upper = _solve_or_none("upper", prob, ball, opts, f"p={p} upper")
    loc_lower = _local_or_none("lower", prob, ball, opts, f"p={p} local lower")
    loc_upper = _local_or_none("upper", prob, ball, opts, f"p={p} local upper")
    lmmse = lmmse_upper(sigma0, prob.ensemble)
    try:
        cr = cramer_rao_lower(gen_gauss_fisher(p, k), prob.ensemble)
    except FisherUndefined:
        cr = None
    return SweepRecord(p, eps, lower, upper, loc_lower, loc_upper, lmmse, cr)


def _sweep_ball_row(r, ensemble, mu0, opts) -> SweepRecord:
    k = ensemble.dimension
    moments = uniform_ball_moments(r, k)
    eps = uniform_ball_epsilon(r, k)
    ball = DivergenceBall(GaussianReference(mu0, moments.covariance), eps)
    prob = validate_problem(ensemble, ball)
    lower = _solve_or_none("lower", prob, ball, opts, f"R={r} lower")
    upper = _solve_or_none("upper", prob, ball, opts, f"R={r} upper")
    lmmse = lmmse_upper(moments.covariance, prob.ensemble)
    return SweepRecord(r, eps, lower, upper, lmmse=lmmse)


def _run_sweep(grid, row_fn, workers=None):
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(row_fn, grid))


def cmd_bound(args) -> int:
    ensemble, ball = load_config(args.config)
    if args.epsilon is not None:
        ball = DivergenceBall(ball.reference, args.epsilon)
    prob = validate_problem(ensemble, ball)
    opts = SolverOptions()
    nominal = lmmse_upper(prob.reference.covariance, prob.ensemble)
    print(f"dimension K={prob.dimension}, channels J={prob.ensemble.count}, "
          f"epsilon={ball.epsilon:.12g}")
    print(f"nominal weighted MMSE sum at the reference: {nominal:.12g}")
    for direction in ("lower", "upper"):
        res = solve_bound(direction, prob, ball, opts)
        print(f"{direction} bound: {res.bound_value:.12g}  "
              f"(alpha={res.alpha:.12g}, kl={res.kl_at_solution:.12g}, "
              f"kl_residual={res.residuals[1]:.3g}, "
              f"fixed_point_residual={res.residuals[0]:.3g}, "
              f"inner_iterations={res.inner_iterations}, "
              f"outer_iterations={res.outer_iterations})")
    return EXIT_OK


def cmd_sweep_p(args) -> int:
    ensemble, ball = load_config(args.config)
    prob = validate_problem(ensemble, ball)
    mu0 = prob.reference.mean
    grid = parse_grid(args.grid)
    opts = SolverOptions()
    rows = _run_sweep(grid, lambda p: _sweep_p_row(p, prob.ensemble, mu0, opts),
                      args.workers)
    for rec in rows:
        try:
            rec.check_ordering()
        except ValueError as exc:
            print(f"solver error: {exc}", file=sys.stderr)
            return EXIT_SOLVER
    _emit_csv(
        ["p", "epsilon", "lower", "upper", "local_lower", "local_upper",
         "lmmse", "cramer_rao"],
        [(r.abscissa, r.epsilon, r.lower, r.upper, r.local_lower,
          r.local_upper, r.lmmse, r.cramer_rao) for r in rows],
        args.out)
    return EXIT_OK


def cmd_sweep_ball(args) -> int:
    ensemble, ball = load_config(args.config)
    prob = validate_problem(ensemble, ball)
    mu0 = prob.reference.mean
    grid = parse_grid(args.grid)
    opts = SolverOptions()
    rows = _run_sweep(grid, lambda r: _sweep_ball_row(r, prob.ensemble, mu0, opts),
                      args.workers)
    for rec in rows:
        try:
            rec.check_ordering()
        except ValueError as exc:
            print(f"solver error: {exc}", file=sys.stderr)
            return EXIT_SOLVER
    _emit_csv(
        ["R", "epsilon", "lower", "upper", "lmmse"],
        [(r.abscissa, r.epsilon, r.lower, r.upper, r.lmmse) for r in rows],
        args.out)
    return EXIT_OK


def _parse_prior(text: str, k: int):
    """'gen-gauss:p', 'uniform-ball:R', or 'gaussian' -> (spec or None, Sigma_0, eps).

    For the analytic families the reference covariance and radius come from
    the family itself; 'gaussian' keeps the config's reference and radius
    and returns spec=None (caller builds the Gaussian spec from the config).
    """
    if text == "gaussian":
        return None, None, None
    kind, _, value = text.partition(":")
    try:
        val = float(value)
    except ValueError:
        raise ConfigError(f"prior {text!r} needs a numeric parameter") from None
    if kind == "gen-gauss":
        spec = PriorSpec(GeneralizedGaussian(val), k)
        sigma0 = gen_gauss_covariance(val, k) * np.eye(k)
        return spec, sigma0, gen_gauss_epsilon(val, k)
    if kind == "uniform-ball":
        spec = PriorSpec(UniformBall(val), k)
        return spec, uniform_ball_moments(val, k).covariance, uniform_ball_epsilon(val, k)
    raise ConfigError(f"unknown prior {text!r}; expected gen-gauss:p, "
                      f"uniform-ball:R, or gaussian")


def cmd_verify(args) -> int:
    ensemble, ball = load_config(args.config)
    k = ensemble.dimension
    spec, sigma0, eps = _parse_prior(args.prior, k)
    if spec is None:
        spec = PriorSpec(Gaussian(ball.reference.mean, ball.reference.covariance), k)
        sigma0, eps = ball.reference.covariance, ball.epsilon
        mu0 = ball.reference.mean
    else:
        # the analytic families are centered at zero
        mu0 = np.zeros(k)
    ball = DivergenceBall(GaussianReference(mu0, sigma0), eps)
    prob = validate_problem(ensemble, ball)
    opts = SolverOptions()

    lower = solve_bound("lower", prob, ball, opts)
    upper = solve_bound("upper", prob, ball, opts)
    est = mc_weighted_sum(spec, prob.ensemble, args.n_outer, args.n_inner, args.seed)
    lo_ok = lower.bound_value - 3.0 * est.std_error <= est.value
    hi_ok = est.value <= upper.bound_value + 3.0 * est.std_error
    print(f"prior {args.prior}: epsilon={eps:.12g}")
    print(f"monte carlo weighted sum: {est.value:.12g} +- {est.std_error:.3g} "
          f"(n_outer={est.n_outer}, n_inner={est.n_inner}, seed={est.seed})")
    print(f"solver bounds: lower={lower.bound_value:.12g}, "
          f"upper={upper.bound_value:.12g}")
    passed = lo_ok and hi_ok
    print("PASS" if passed else "FAIL", "(bracketing at 3 standard errors)")
    return EXIT_OK if passed else EXIT_VERIFY


def cmd_scenario(args) -> int:
    distances = tuple(float(tok) for tok in args.distances.split(",") if tok.strip())
    field = SensorField(distances, args.rho0, args.gamma, args.m, args.sigma0)
    weights = None
    if args.weights:
        weights = [float(tok) for tok in args.weights.split(",") if tok.strip()]
    ensemble = noise_from_distances(field, args.dimension, weights)
    k = args.dimension
    ball = DivergenceBall(GaussianReference(np.zeros(k), np.eye(k)), args.epsilon)
    validate_problem(ensemble, ball)
    save_config(args.out, ensemble, ball)
    print(f"wrote {args.out}: {len(distances)} channels, K={k}, "
          f"epsilon={args.epsilon}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mmse-bounds",
        description="Bounds on weighted MMSE sums over a KL ball of priors")
    sub = parser.add_subparsers(dest="command", required=True)

    p_bound = sub.add_parser("bound", help="solve both bounds for a config")
    p_bound.add_argument("--config", required=True)
    p_bound.add_argument("--epsilon", type=float, default=None,
                         help="override the config's KL radius")
    p_bound.set_defaults(fn=cmd_bound)

    p_sp = sub.add_parser("sweep-p", help="generalized-Gaussian exponent sweep")
    p_sp.add_argument("--config", required=True)
    p_sp.add_argument("--grid", required=True,
                      help="start:stop:count or comma-separated values")
    p_sp.add_argument("--out", default=None, help="CSV path (default stdout)")
    p_sp.add_argument("--workers", type=int, default=None)
    p_sp.set_defaults(fn=cmd_sweep_p)

    p_sb = sub.add_parser("sweep-ball", help="uniform-ball radius sweep")
    p_sb.add_argument("--config", required=True)
    p_sb.add_argument("--grid", required=True,
                      help="start:stop:count or comma-separated values")
    p_sb.add_argument("--out", default=None, help="CSV path (default stdout)")
    p_sb.add_argument("--workers", type=int, default=None)
    p_sb.set_defaults(fn=cmd_sweep_ball)

    p_v = sub.add_parser("verify", help="Monte Carlo bracketing check")
    p_v.add_argument("--config", required=True)
    p_v.add_argument("--prior", required=True,
                     help="gen-gauss:p | uniform-ball:R | gaussian")
    p_v.add_argument("--n-outer", type=int, default=2000)
    p_v.add_argument("--n-inner", type=int, default=4000)
    p_v.add_argument("--seed", type=int, default=0)
    p_v.set_defaults(fn=cmd_verify)

    p_sc = sub.add_parser("scenario", help="write a sensor-field config")
    p_sc.add_argument("--distances", required=True, help="comma-separated meters")
    p_sc.add_argument("--rho0", type=float, required=True, help="source power rho_0^2")
    p_sc.add_argument("--gamma", type=float, required=True, help="decay coefficient")
    p_sc.add_argument("--m", type=float, required=True, help="path-loss exponent in [2,3]")
    p_sc.add_argument("--sigma0", type=float, required=True, help="base noise sigma_0^2")
    p_sc.add_argument("--out", required=True, help="config path to write")
    p_sc.add_argument("--dimension", type=int, default=3)
    p_sc.add_argument("--epsilon", type=float, default=0.0,
                      help="KL radius stored in the config")
    p_sc.add_argument("--weights", default=None,
                      help="comma-separated channel weights (default all 1)")
    p_sc.set_defaults(fn=cmd_scenario)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, ProblemValidationError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BracketFailure, NoConvergence) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
