"""Solver for the extremal-covariance conditions.

Finds (alpha, Sigma_X) such that

    Sigma_X^-1 = Sigma_0^-1 - alpha * sum_j lambda_j W_j^T W_j,
    kl(Sigma_X, Sigma_0) = epsilon,

with alpha >= 0 for the upper bound and alpha <= 0 for the lower bound.
The extremal prior is Gaussian with covariance Sigma_X, so the bound value
is the weighted MMSE sum evaluated at Sigma_X.

Inner loop: damped fixed-point iteration on the inverse form above, with
the damping halved while consecutive updates anti-correlate (oscillatory
regime, which occurs for alpha > 0). Once the iteration is in the basin or
progress stalls, a Newton solve on the packed residual finishes to full
tolerance; plain iteration alone contracts arbitrarily slowly near a fold
of the solution curve.

Outer loop: bracket alpha by geometric expansion from 0 (shrinking on loss
of positive definiteness), then a bracket-safeguarded secant search on
kl - epsilon, warm-starting each covariance solve from the nearest
previously solved alpha.

Fold handling: for large epsilon the solution curve alpha -> Sigma(alpha)
can fold back (the lower branch at small exponents does), so the kl =
epsilon point sits where no fixed point at frozen alpha is attracting. The
expansion detects this as an inner-loop failure with kl still short of
epsilon and switches to Newton on the extended system {fixed point,
kl = epsilon} with alpha free, warm-started from the stable branch; small
warm-started alpha steps toward the fold supply closer starts when needed.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy import optimize
from scipy.linalg import cho_factor, cho_solve

from .exceptions import BracketFailure, LostPositiveDefiniteness, NoConvergence
from .gaussian import MmseSummary, kl_same_mean_gaussians, mmse_matrix, weighted_mmse_sum
from .problem import DivergenceBall, Problem, validate_problem


class Direction(enum.Enum):
    UPPER = "upper"
    LOWER = "lower"


def _as_direction(direction) -> Direction:
    if isinstance(direction, Direction):
        return direction
    return Direction(str(direction).lower())


@dataclass(frozen=True)
class SolverOptions:
    """Tolerances and iteration caps for the two-level solver.

    inner_tol is a relative Frobenius tolerance on the Sigma_X fixed point;
    outer_tol is absolute on KL - epsilon. `damping` is the step size of
    the inner update, adapted downward while the iteration oscillates.
    """

    inner_tol: float = 1e-11
    inner_max_iter: int = 500
    outer_tol: float = 1e-10
    outer_max_iter: int = 200
    damping: float = 1.0

    def __post_init__(self):
        if not (self.inner_tol > 0 and self.outer_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.inner_max_iter < 1 or self.outer_max_iter < 1:
            raise ValueError("iteration caps must be >= 1")
        if not 0.0 < self.damping <= 1.0:
            raise ValueError("damping must lie in (0, 1]")


@dataclass(frozen=True)
class BoundResult:
    """Solved bound: multiplier, extremal covariance, value, diagnostics."""

    direction: Direction
    alpha: float
    sigma_x: np.ndarray
    bound_value: float
    summary: MmseSummary
    kl_at_solution: float
    inner_iterations: int
    outer_iterations: int
    residuals: tuple[float, float]


class _Ctx:
    """Per-problem constants shared by all inner iterations."""

    __slots__ = ("noise", "weights", "sigma0", "sigma0_inv", "eye")

    def __init__(self, noise, weights, sigma0, sigma0_inv):
        self.noise = noise
        self.weights = weights
        self.sigma0 = sigma0
        self.sigma0_inv = sigma0_inv
        self.eye = np.eye(sigma0.shape[0])


def _make_ctx(ensemble, reference) -> _Ctx:
    if isinstance(ensemble, Problem):
        return _Ctx(ensemble.noise_stack, ensemble.weights,
                    ensemble.reference.covariance, ensemble.sigma0_inv)
    sigma0 = np.asarray(reference.covariance, dtype=float)
    c = cho_factor(sigma0, lower=True, check_finite=False)
    sigma0_inv = cho_solve(c, np.eye(sigma0.shape[0]), check_finite=False)
    return _Ctx(ensemble.noise_stack, ensemble.weights, sigma0,
                0.5 * (sigma0_inv + sigma0_inv.T))


def _gmap(sigma, alpha, ctx, iteration):
    """One application of Sigma -> (Sigma_0^-1 - alpha sum lambda_j W_j^T W_j)^-1."""
    a = sigma[None, :, :] + ctx.noise
    wt = np.linalg.solve(a, ctx.noise)  # stack of W_j^T
    s = np.einsum("j,jik,jmk->im", ctx.weights, wt, wt)
    m = ctx.sigma0_inv - alpha * s
    m = 0.5 * (m + m.T)
    try:
        c = cho_factor(m, lower=True, check_finite=False)
    except np.linalg.LinAlgError:
        raise LostPositiveDefiniteness(alpha, iteration) from None
    new = cho_solve(c, ctx.eye, check_finite=False)
    return 0.5 * (new + new.T)


def _newton_polish(alpha, ctx, opts, sigma_start):
    """Newton solve (hybrid Powell) of the packed fixed-point residual.

    Returns (sigma, residual, evaluations) when a positive definite root
    within inner_tol is found, else None. Indifferent to the stability of
    the fixed point, so it reaches roots the damped iteration cannot.
    """
    k = ctx.sigma0.shape[0]
    iu = np.triu_indices(k)
    scale = max(float(np.linalg.norm(sigma_start)), 1e-300)

    def fun(v):
        s = np.zeros((k, k))
        s[iu] = v
        s.T[iu] = v
        try:
            g = _gmap(s, alpha, ctx, 0)
        except (LostPositiveDefiniteness, np.linalg.LinAlgError):
            return np.full(v.shape, 1e6)
        return (g - s)[iu] / scale

    sol = optimize.root(fun, sigma_start[iu], method="hybr",
                        options={"xtol": 1e-14})
    s = np.zeros((k, k))
    s[iu] = sol.x
    s.T[iu] = sol.x
    if not np.all(np.isfinite(s)):
        return None
    try:
        if np.linalg.eigvalsh(s)[0] <= 0.0:
            return None
        g = _gmap(s, alpha, ctx, 0)
    except (LostPositiveDefiniteness, np.linalg.LinAlgError):
        return None
    res = float(np.linalg.norm(g - s) / np.linalg.norm(s))
    if res > opts.inner_tol:
        return None
    return s, res, int(sol.nfev)


def _fixed_point(alpha, ctx, opts, sigma_init=None, damping=None, polish=True):
    """Damped fixed-point solve for Sigma_X at one alpha.

    Iterates sigma <- sigma + d * (G(sigma) - sigma) with the damping d
    halved while updates anti-correlate. When the residual stalls or drops
    into the Newton basin, hands off to `_newton_polish`; with polish
    disabled (used while marching along the stable branch) the plain
    iteration runs alone and only attracting fixed points are reachable.

    Returns (sigma, residual, iterations, final_damping). Raises
    LostPositiveDefiniteness or NoConvergence.
    """
    if alpha == 0.0:
        return ctx.sigma0.copy(), 0.0, 1, damping if damping else opts.damping
    sigma = ctx.sigma0.copy() if sigma_init is None else np.array(sigma_init, dtype=float)
    d = opts.damping if damping is None else min(damping, opts.damping)
    prev_u = None
    cooldown = 0
    best_res = np.inf
    best_sigma = sigma
    no_gain = 0
    polish_tries = 0
    res = np.inf
    it = 0
    for it in range(1, opts.inner_max_iter + 1):
        try:
            target = _gmap(sigma, alpha, ctx, it)
        except (LostPositiveDefiniteness, np.linalg.LinAlgError):
            # the iterate left the feasible cone; a Newton solve from the
            # best iterate may still reach a (possibly repelling) root
            if polish and best_res < np.inf:
                hit = _newton_polish(alpha, ctx, opts, best_sigma)
                if hit is not None:
                    return hit[0], hit[1], it + hit[2], d
            raise
        u = target - sigma
        res = float(np.linalg.norm(u) / max(np.linalg.norm(sigma), 1e-300))
        if res <= opts.inner_tol:
            return target, res, it, d
        if res < 0.9 * best_res:
            no_gain = 0
        else:
            no_gain += 1
        if res < best_res:
            best_res = res
            best_sigma = sigma
        if polish and polish_tries < 3 and (res < 1e-5 or no_gain >= 12):
            hit = _newton_polish(alpha, ctx, opts, best_sigma)
            if hit is not None:
                return hit[0], hit[1], it + hit[2], d
            polish_tries += 1
            no_gain = 0
        if prev_u is not None and cooldown == 0:
            dot = float(np.sum(u * prev_u))
            norm_p = float(np.linalg.norm(prev_u))
            norm_u = float(np.linalg.norm(u))
            if norm_p > 0 and norm_u > 0:
                rho = dot / norm_p**2
                if rho < -0.2 and d > opts.damping * 2.0**-12:
                    d *= 0.5
                    cooldown = 3
                elif rho > 0.2 and d < opts.damping:
                    d = min(opts.damping, 2.0 * d)
                    cooldown = 3
        if cooldown:
            cooldown -= 1
        sigma = sigma + d * u
        sigma = 0.5 * (sigma + sigma.T)
        prev_u = u
    if polish:
        hit = _newton_polish(alpha, ctx, opts, best_sigma)
        if hit is not None:
            return hit[0], hit[1], it + hit[2], d
    raise NoConvergence(
        f"fixed point at alpha={alpha!r} not converged after {it} iterations "
        f"(residual {res:.3e}, best {best_res:.3e})",
        residual=res, iterations=it)


def _constrained_root(ctx, epsilon, alpha0, sigma_start, opts):
    """Newton solve of {G(Sigma; alpha) = Sigma, kl(Sigma) = epsilon}, alpha free.

    The extended system is regular at a fold of the alpha-parameterized
    curve, so this reaches kl = epsilon roots past the fold. Returns
    (alpha, sigma, residual, kl, evaluations) or None.
    """
    k = ctx.sigma0.shape[0]
    iu = np.triu_indices(k)
    scale = max(float(np.linalg.norm(ctx.sigma0)), 1e-300)
    kl_scale = max(epsilon, 1e-6)

    def fun(z):
        s = np.zeros((k, k))
        s[iu] = z[:-1]
        s.T[iu] = z[:-1]
        try:
            g = _gmap(s, z[-1], ctx, 0)
            kl = kl_same_mean_gaussians(s, ctx.sigma0)
        except (LostPositiveDefiniteness, np.linalg.LinAlgError, ValueError):
            return np.full(z.shape, 1e6)
        out = np.empty(z.shape)
        out[:-1] = (g - s)[iu] / scale
        out[-1] = (kl - epsilon) / kl_scale
        return out

    z0 = np.concatenate([np.asarray(sigma_start)[iu], [alpha0]])
    sol = optimize.root(fun, z0, method="hybr",
                        options={"xtol": 1e-14, "maxfev": 200 * (len(z0) + 1)})
    s = np.zeros((k, k))
    s[iu] = sol.x[:-1]
    s.T[iu] = sol.x[:-1]
    alpha = float(sol.x[-1])
    if not np.all(np.isfinite(s)) or not np.isfinite(alpha):
        return None
    try:
        if np.linalg.eigvalsh(s)[0] <= 0.0:
            return None
        g = _gmap(s, alpha, ctx, 0)
        kl = kl_same_mean_gaussians(s, ctx.sigma0)
    except (LostPositiveDefiniteness, np.linalg.LinAlgError, ValueError):
        return None
    res = float(np.linalg.norm(g - s) / np.linalg.norm(s))
    if res > opts.inner_tol or abs(kl - epsilon) > opts.outer_tol:
        return None
    return alpha, s, res, kl, int(sol.nfev)


def _march_boundary(ctx, opts, epsilon, start, sign, state):
    """Warm-started small alpha steps along the stable branch.

    Walks from `start` = (alpha, sigma, kl) toward larger |alpha|, halving
    the step when the plain iteration fails (the fold repels it) and
    growing it again after successes. Returns the visited points; stops
    once kl >= epsilon, the step underflows, or the budget runs out.
    """
    march_opts = replace(opts, inner_tol=max(opts.inner_tol, 1e-9),
                         inner_max_iter=300)
    alpha, sigma, kl = start
    step = sign * max(0.05 * abs(alpha), 1e-3)
    points = []
    for _ in range(200):
        if abs(step) < 1e-9 * max(1.0, abs(alpha)):
            break
        try:
            s2, r2, it2, _ = _fixed_point(alpha + step, ctx, march_opts,
                                          sigma_init=sigma, polish=False)
        except (LostPositiveDefiniteness, NoConvergence):
            step *= 0.5
            continue
        state["inner"] += it2
        alpha += step
        sigma = s2
        kl = kl_same_mean_gaussians(sigma, ctx.sigma0)
        points.append((alpha, sigma, kl))
        if kl >= epsilon:
            break
        step *= 1.4
    return points


def sigma_of_alpha(alpha, ensemble, reference, opts: SolverOptions | None = None,
                   sigma_init=None):
    """Solve the inverse-form fixed point for Sigma_X at a given alpha.

    Parameters
    ----------
    alpha : float
        Lagrange multiplier; positive values tilt toward the upper bound,
        negative toward the lower.
    ensemble : ChannelEnsemble or Problem
    reference : GaussianReference
    opts : SolverOptions, optional
    sigma_init : (K, K) ndarray, optional
        Warm start; defaults to Sigma_0.

    Returns
    -------
    (sigma_x, residual, iterations)
        Covariance with relative Frobenius fixed-point residual below
        ``opts.inner_tol``, the residual, and the iteration count.

    Raises
    ------
    LostPositiveDefiniteness
        If the iteration matrix loses positive definiteness (alpha beyond
        the feasible range for the upper bound).
    NoConvergence
    """
    opts = opts or SolverOptions()
    ctx = _make_ctx(ensemble, reference)
    sigma, res, it, _ = _fixed_point(alpha, ctx, opts, sigma_init=sigma_init)
    return sigma, res, it


def kl_gap(alpha, ensemble, reference, epsilon, opts: SolverOptions | None = None):
    """kl(Sigma_X(alpha), Sigma_0) - epsilon; zero at the bound solution."""
    opts = opts or SolverOptions()
    ctx = _make_ctx(ensemble, reference)
    sigma, _, _ = sigma_of_alpha(alpha, ensemble, reference, opts)
    return kl_same_mean_gaussians(sigma, ctx.sigma0) - epsilon


def opt_covariance_residual(alpha, sigma_x, ensemble, reference) -> float:
    """Relative Frobenius residual of the additive-form optimality condition.

    Checks Sigma_X = Sigma_0 + alpha (sum_j lambda_j MMSE_j^T MMSE_j) SNR_0^-1
    at the given point; equivalent to the inverse form solved by
    `sigma_of_alpha`, so this is an independent verification of a solution.
    """
    sigma_x = np.asarray(sigma_x, dtype=float)
    sigma0 = np.asarray(reference.covariance, dtype=float)
    acc = np.zeros_like(sigma_x)
    for ch in ensemble.channels:
        m = mmse_matrix(sigma_x, ch.noise_covariance)
        acc += ch.weight * (m.T @ m)
    # SNR_0^-1 = Sigma_X^-1 Sigma_0
    snr0_inv = np.linalg.solve(sigma_x, sigma0)
    rhs = sigma0 + alpha * acc @ snr0_inv
    return float(np.linalg.norm(sigma_x - rhs) / np.linalg.norm(sigma_x))


def _initial_step(ctx) -> float:
    """First bracket probe: a quarter of the alpha that would cancel the
    smallest curvature of Sigma_0^-1 if S stayed at its center value."""
    s0 = _gmap_s(ctx.sigma0, ctx)
    lam_min = float(np.linalg.eigvalsh(ctx.sigma0_inv)[0])
    lam_max = float(np.linalg.eigvalsh(s0)[-1])
    return 0.25 * lam_min / lam_max


def _gmap_s(sigma, ctx):
    a = sigma[None, :, :] + ctx.noise
    wt = np.linalg.solve(a, ctx.noise)
    return np.einsum("j,jik,jmk->im", ctx.weights, wt, wt)


def solve_bound(direction, ensemble, ball: DivergenceBall,
                opts: SolverOptions | None = None) -> BoundResult:
    """Solve for the upper or lower bound on the weighted MMSE sum.

    Parameters
    ----------
    direction : Direction or {"upper", "lower"}
    ensemble : ChannelEnsemble or Problem
    ball : DivergenceBall
        Reference prior and KL radius epsilon >= 0.
    opts : SolverOptions, optional

    Returns
    -------
    BoundResult
        With ``|kl_at_solution - epsilon| <= opts.outer_tol`` and the
        fixed-point residual below ``opts.inner_tol``.

    Raises
    ------
    BracketFailure
        If epsilon exceeds the KL reachable along the solution curve even
        with the fold continuation.
    NoConvergence
    """
    direction = _as_direction(direction)
    opts = opts or SolverOptions()
    prob = ensemble if isinstance(ensemble, Problem) else validate_problem(ensemble, ball)
    ctx = _make_ctx(prob, None)
    eps = ball.epsilon
    reference = ball.reference

    def build(alpha, sigma, kl, res, total_inner, n_evals):
        summary = weighted_mmse_sum(sigma, prob.ensemble, reference)
        return BoundResult(
            direction=direction,
            alpha=alpha,
            sigma_x=sigma,
            bound_value=summary.weighted_sum,
            summary=summary,
            kl_at_solution=kl,
            inner_iterations=total_inner,
            outer_iterations=n_evals,
            residuals=(res, abs(kl - eps)),
        )

    if eps <= opts.outer_tol:
        # the ball is (numerically) a point; both bounds sit at the center
        return build(0.0, ctx.sigma0.copy(), 0.0, 0.0, 1, 0)

    sign = 1.0 if direction is Direction.UPPER else -1.0
    state = {"inner": 0, "evals": 0}
    cache = []  # (alpha, sigma, kl, res, damping)
    value0 = weighted_mmse_sum(ctx.sigma0, prob.ensemble, reference).weighted_sum

    def eval_alpha(a):
        if state["evals"] >= opts.outer_max_iter:
            raise NoConvergence(
                f"outer iteration cap {opts.outer_max_iter} reached solving the "
                f"{direction.value} bound at epsilon={eps!r}")
        # continuation: warm-start from the Sigma_0 side (largest |alpha|
        # not beyond |a|), where the fixed point is reliably attracting
        starts = [(None, None)]
        below = [e for e in cache if abs(e[0]) <= abs(a)]
        if below:
            nearest = max(below, key=lambda e: abs(e[0]))
            starts = [(nearest[1], nearest[4]), (None, None)]
        last = None
        for sigma_init, d_init in starts:
            try:
                sigma, res, it, d = _fixed_point(a, ctx, opts,
                                                 sigma_init=sigma_init, damping=d_init)
            except (LostPositiveDefiniteness, NoConvergence) as exc:
                last = exc
                continue
            state["inner"] += it
            state["evals"] += 1
            kl = kl_same_mean_gaussians(sigma, ctx.sigma0)
            cache.append((a, sigma, kl, res, d))
            return kl
        state["evals"] += 1
        raise last

    def accept_root(r):
        # reject extended-system roots that moved the objective the wrong
        # way relative to the ball center (a different solution branch)
        alpha_r, sigma_r, res_r, kl_r, nfev = r
        value = weighted_mmse_sum(sigma_r, prob.ensemble, reference).weighted_sum
        return sign * (value - value0) >= -1e-9 * max(1.0, abs(value0))

    def fold_ladder():
        """kl = epsilon via the extended system, warm-started from the
        stable branch; marches closer to the fold when the first starts
        fail. Returns (alpha, sigma, res, kl) or None."""
        def attempt(a0, s0):
            if state["evals"] >= opts.outer_max_iter:
                return None
            state["evals"] += 1
            r = _constrained_root(ctx, eps, a0, s0, opts)
            if r is None:
                return None
            state["inner"] += r[4]
            if not accept_root(r):
                return None
            return r[:4]

        seen = sorted((e for e in cache if e[0] != 0.0), key=lambda e: -e[2])
        for a0, s0, kl0, _, _ in seen[:4]:
            hit = attempt(a0, s0)
            if hit is not None:
                return hit
        if not cache:
            return None
        frontier = max(cache, key=lambda e: abs(e[0]))
        pts = _march_boundary(ctx, opts, eps, frontier[:3], sign, state)
        for a0, s0, kl0 in reversed(pts[-6:]):
            hit = attempt(a0, s0)
            if hit is not None:
                return hit
        return None

    # --- bracket: expand geometrically from 0 until kl >= eps, a fold
    # blocks the iteration, or PD is lost
    lo_a, lo_kl = 0.0, 0.0
    hi = sign * _initial_step(ctx)
    hi_kl = None
    best_a, best_kl = 0.0, 0.0
    bracketed = False
    while True:
        try:
            hi_kl = eval_alpha(hi)
        except NoConvergence:
            break  # fold shadow: no attracting root at this alpha
        except LostPositiveDefiniteness:
            hi = 0.5 * (hi + lo_a)
            if abs(hi - lo_a) <= 1e-13 * max(1.0, abs(lo_a)):
                break
            continue
        if hi_kl < lo_kl - 1e-12:
            warnings.warn(
                f"KL gap decreased from {lo_kl!r} to {hi_kl!r} while expanding "
                f"alpha toward {hi!r}; proceeding with the bracketing pair",
                RuntimeWarning)
        if hi_kl > best_kl:
            best_a, best_kl = hi, hi_kl
        if hi_kl >= eps:
            bracketed = True
            break
        lo_a, lo_kl = hi, hi_kl
        hi *= 2.0

    if not bracketed:
        hit = fold_ladder()
        if hit is not None:
            return build(hit[0], hit[1], hit[3], hit[2], state["inner"], state["evals"])
        raise BracketFailure(direction.value, eps, best_a, best_kl)

    # --- safeguarded secant (regula falsi with Illinois weighting) on kl - eps
    a, fa = lo_a, lo_kl - eps
    b, fb = hi, hi_kl - eps
    accepted = None  # (alpha, sigma, kl, res)
    if abs(fb) <= opts.outer_tol:
        e = next(e for e in reversed(cache) if e[0] == b)
        accepted = (e[0], e[1], e[2], e[3])
    side = 0
    while accepted is None:
        if fb != fa:
            c = b - fb * (b - a) / (fb - fa)
        else:
            c = 0.5 * (a + b)
        width = b - a
        lo_guard = min(a, b) + 0.05 * abs(width)
        hi_guard = max(a, b) - 0.05 * abs(width)
        if not (lo_guard <= c <= hi_guard):
            c = 0.5 * (a + b)
        try:
            kc = eval_alpha(c)
        except (LostPositiveDefiniteness, NoConvergence) as exc:
            # a fold crosses the bracket interior; the extended system
            # does not care about stability, so switch to it
            hit = fold_ladder()
            if hit is not None:
                return build(hit[0], hit[1], hit[3], hit[2],
                             state["inner"], state["evals"])
            raise NoConvergence(
                f"inner solve failed inside the bracket at alpha={c!r} and the "
                f"fold continuation found no kl=epsilon root") from exc
        fc = kc - eps
        if abs(fc) <= opts.outer_tol:
            e = next(e for e in reversed(cache) if e[0] == c)
            accepted = (e[0], e[1], e[2], e[3])
            break
        if (fc < 0) == (fa < 0):
            a, fa = c, fc
            if side == -1:
                fb *= 0.5  # Illinois: relax the stagnant endpoint
            side = -1
        else:
            b, fb = c, fc
            if side == 1:
                fa *= 0.5
            side = 1

    alpha, sigma, kl, res = accepted
    return build(alpha, sigma, kl, res, state["inner"], state["evals"])


def local_bound(direction, ensemble, channel_index: int, ball: DivergenceBall,
                opts: SolverOptions | None = None) -> BoundResult:
    """Bound for a single channel under the same KL constraint.

    Equivalent to `solve_bound` on the one-channel ensemble with weight 1;
    the result is independent of the original channel weight.
    """
    ens = ensemble.ensemble if isinstance(ensemble, Problem) else ensemble
    return solve_bound(direction, ens.single(channel_index), ball, opts)


def local_bounds_weighted(direction, ensemble, ball: DivergenceBall,
                          opts: SolverOptions | None = None):
    """Weighted sum of per-channel bounds: sum_j lambda_j local_bound(j).

    Optimizing each channel separately under the full KL budget is looser
    than the joint problem, so this brackets the joint bound from outside.

    Returns
    -------
    (value, results) : (float, tuple[BoundResult, ...])
    """
    ens = ensemble.ensemble if isinstance(ensemble, Problem) else ensemble
    results = tuple(local_bound(direction, ens, j, ball, opts)
                    for j in range(ens.count))
    value = float(np.dot(ens.weights, [r.bound_value for r in results]))
    return value, results
