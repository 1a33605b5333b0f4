"""Bound solver: analytic oracles, postconditions, fold regression.

Analytic oracles used here:

* K = 1 (any J): the feasible covariances form an interval in the ratio
  s = sigma_x^2/sigma_0^2 and every channel MMSE is strictly increasing in
  s, so each bound sits at the endpoint where s - log s - 1 = 2 epsilon;
  the smaller root gives the lower bound, the larger the upper.
* Isotropic K >= 2 (Sigma_0 = a I, all Sigma_N_j = b_j I): the extremal
  covariance stays isotropic, reducing to the same scalar equation with
  2 epsilon / K on the right-hand side.

Both are independent of the solver's own fixed-point machinery.
"""

import numpy as np
import pytest
from scipy.optimize import brentq

from mmse_bounds import (
    BoundResult,
    ChannelEnsemble,
    Direction,
    DivergenceBall,
    GaussianReference,
    LostPositiveDefiniteness,
    SolverOptions,
    kl_gap,
    kl_same_mean_gaussians,
    lmmse_upper,
    local_bound,
    local_bounds_weighted,
    opt_covariance_residual,
    sigma_of_alpha,
    solve_bound,
    validate_problem,
)
from conftest import isotropic_ball

# Frozen regression values for the bundled four-channel ensemble with
# reference N(0, 56.55016038553131 I_3) and epsilon = 0.5956003879952156.
# The lower bound at this radius lies past a fold of the solution curve.
# Both values were confirmed by a derivative-free penalized search over
# Cholesky factors of the feasible set (agreement to 7 significant digits).
HARD_EPS = 0.5956003879952156
HARD_VAR = 56.55016038553131
HARD_LOWER = 14.7818631962
HARD_UPPER = 20.1322578679


def scalar_ratio(epsilon: float, direction: str) -> float:
    """Root of s - log s - 1 = 2 epsilon on the side matching `direction`."""
    f = lambda s: s - np.log(s) - 1.0 - 2.0 * epsilon
    if direction == "lower":
        return brentq(f, 1e-12, 1.0, xtol=1e-15, rtol=8.9e-16)
    return brentq(f, 1.0, 1e12, xtol=1e-15, rtol=8.9e-16)


class TestScalarOracle:
    @pytest.mark.parametrize("direction", ["lower", "upper"])
    @pytest.mark.parametrize("epsilon", [0.01, 0.1, 0.5])
    def test_one_channel(self, direction, epsilon):
        s0, sn, lam = 2.0, 0.5, 1.7
        ens = ChannelEnsemble.from_arrays([[[sn]]], [lam])
        res = solve_bound(direction, ens, isotropic_ball(1, s0, epsilon))
        s = scalar_ratio(epsilon, direction)
        expect = lam * (s * s0 * sn) / (s * s0 + sn)
        assert res.bound_value == pytest.approx(expect, rel=1e-9)
        assert res.sigma_x[0, 0] == pytest.approx(s * s0, rel=1e-8)

    @pytest.mark.parametrize("direction", ["lower", "upper"])
    def test_tiny_epsilon(self, direction):
        # d s / d kl ~ 1/sqrt(kl) near s = 1, so the default outer
        # tolerance would leak ~1e-8 relative error into the value here;
        # tighten it to keep the oracle comparison meaningful
        epsilon = 1e-6
        s0, sn, lam = 2.0, 0.5, 1.7
        ens = ChannelEnsemble.from_arrays([[[sn]]], [lam])
        opts = SolverOptions(outer_tol=1e-13)
        res = solve_bound(direction, ens, isotropic_ball(1, s0, epsilon), opts)
        s = scalar_ratio(epsilon, direction)
        expect = lam * (s * s0 * sn) / (s * s0 + sn)
        assert res.bound_value == pytest.approx(expect, rel=1e-8)

    @pytest.mark.parametrize("direction", ["lower", "upper"])
    def test_four_channels(self, direction):
        # all channel MMSEs increase in s, so the same scalar root applies
        epsilon = 0.25
        s0 = 1.4
        sns = [0.3, 1.0, 2.5, 7.0]
        lams = [1.0, 0.2, 2.0, 0.5]
        ens = ChannelEnsemble.from_arrays([[[v]] for v in sns], lams)
        res = solve_bound(direction, ens, isotropic_ball(1, s0, epsilon))
        s = scalar_ratio(epsilon, direction)
        expect = sum(l * (s * s0 * v) / (s * s0 + v) for l, v in zip(lams, sns))
        assert res.bound_value == pytest.approx(expect, rel=1e-9)

    @pytest.mark.parametrize("direction", ["lower", "upper"])
    def test_isotropic_k3(self, direction):
        a, b, lam, epsilon = 2.0, 0.7, 1.3, 0.3
        ens = ChannelEnsemble.from_arrays([b * np.eye(3)], [lam])
        res = solve_bound(direction, ens, isotropic_ball(3, a, epsilon))
        s = scalar_ratio(epsilon / 3.0, direction)  # s - log s - 1 = 2 eps / K
        expect = lam * 3.0 * (s * a * b) / (s * a + b)
        assert res.bound_value == pytest.approx(expect, rel=1e-9)
        np.testing.assert_allclose(res.sigma_x, s * a * np.eye(3), rtol=1e-7,
                                   atol=1e-12)


class TestPointBall:
    def test_zero_epsilon_collapses_to_reference(self, demo_ensemble):
        ball = isotropic_ball(3, 5.0, 0.0)
        for direction in ("lower", "upper"):
            res = solve_bound(direction, demo_ensemble, ball)
            assert res.alpha == 0.0
            assert res.kl_at_solution == 0.0
            assert res.bound_value == pytest.approx(
                lmmse_upper(5.0 * np.eye(3), demo_ensemble), rel=1e-14)
            np.testing.assert_array_equal(res.sigma_x, 5.0 * np.eye(3))


class TestPostconditions:
    @pytest.mark.parametrize("direction, sign", [("upper", 1.0), ("lower", -1.0)])
    @pytest.mark.parametrize("epsilon", [0.05, 0.2, HARD_EPS])
    def test_solution_certificates(self, demo_ensemble, direction, sign, epsilon):
        opts = SolverOptions()
        ball = isotropic_ball(3, HARD_VAR, epsilon)
        res = solve_bound(direction, demo_ensemble, ball, opts)
        assert isinstance(res, BoundResult)
        # KL constraint active to outer tolerance
        assert abs(res.kl_at_solution - epsilon) <= opts.outer_tol
        assert res.residuals[1] <= opts.outer_tol
        # fixed-point residual within inner tolerance
        assert res.residuals[0] <= opts.inner_tol
        # multiplier on the correct side
        assert sign * res.alpha > 0
        # independent optimality check via the additive form
        add = opt_covariance_residual(res.alpha, res.sigma_x, demo_ensemble,
                                      ball.reference)
        assert add <= 1e-8
        # reported KL recomputes from sigma_x
        assert kl_same_mean_gaussians(res.sigma_x, ball.reference.covariance) \
            == pytest.approx(res.kl_at_solution, abs=1e-12)

    def test_fold_regression(self, demo_ensemble):
        ball = isotropic_ball(3, HARD_VAR, HARD_EPS)
        lo = solve_bound("lower", demo_ensemble, ball)
        up = solve_bound("upper", demo_ensemble, ball)
        assert lo.bound_value == pytest.approx(HARD_LOWER, rel=1e-8)
        assert up.bound_value == pytest.approx(HARD_UPPER, rel=1e-8)

    def test_epsilon_monotonicity(self, demo_ensemble):
        # growing the ball can only widen the bounds
        grid = [0.05, 0.2, HARD_EPS, 0.9]
        uppers = [solve_bound("upper", demo_ensemble,
                              isotropic_ball(3, HARD_VAR, e)).bound_value
                  for e in grid]
        lowers = [solve_bound("lower", demo_ensemble,
                              isotropic_ball(3, HARD_VAR, e)).bound_value
                  for e in grid]
        assert all(b >= a - 1e-10 for a, b in zip(uppers, uppers[1:]))
        assert all(b <= a + 1e-10 for a, b in zip(lowers, lowers[1:]))

    def test_deterministic(self, demo_ensemble):
        ball = isotropic_ball(3, HARD_VAR, 0.2)
        a = solve_bound("upper", demo_ensemble, ball)
        b = solve_bound("upper", demo_ensemble, ball)
        assert a.bound_value == b.bound_value
        assert a.alpha == b.alpha

    def test_accepts_validated_problem(self, demo_ensemble):
        ball = isotropic_ball(3, HARD_VAR, 0.2)
        prob = validate_problem(demo_ensemble, ball)
        a = solve_bound("upper", prob, ball)
        b = solve_bound("upper", demo_ensemble, ball)
        assert a.bound_value == pytest.approx(b.bound_value, rel=1e-12)

    def test_direction_spellings(self, demo_ensemble):
        ball = isotropic_ball(3, HARD_VAR, 0.1)
        a = solve_bound(Direction.UPPER, demo_ensemble, ball)
        b = solve_bound("UPPER", demo_ensemble, ball)
        assert a.bound_value == b.bound_value
        with pytest.raises(ValueError):
            solve_bound("sideways", demo_ensemble, ball)


class TestOrdering:
    def test_local_bounds_bracket_joint(self, demo_ensemble):
        ball = isotropic_ball(3, HARD_VAR, 0.2)
        sx0 = HARD_VAR * np.eye(3)
        lo = solve_bound("lower", demo_ensemble, ball).bound_value
        up = solve_bound("upper", demo_ensemble, ball).bound_value
        loc_lo, _ = local_bounds_weighted("lower", demo_ensemble, ball)
        loc_up, _ = local_bounds_weighted("upper", demo_ensemble, ball)
        lm = lmmse_upper(sx0, demo_ensemble)
        slack = 1e-9
        assert loc_lo <= lo + slack
        assert lo <= lm + slack
        assert lm <= up + slack
        assert up <= loc_up + slack

    def test_local_bound_ignores_channel_weight(self, demo_ensemble):
        ball = isotropic_ball(3, HARD_VAR, 0.2)
        reweighted = ChannelEnsemble.from_arrays(
            list(demo_ensemble.noise_stack), [7.0, 7.0, 7.0, 7.0])
        for j in (0, 3):
            a = local_bound("upper", demo_ensemble, j, ball)
            b = local_bound("upper", reweighted, j, ball)
            assert a.bound_value == pytest.approx(b.bound_value, rel=1e-10)


class TestInnerSolve:
    def test_sigma_of_alpha_residual(self, demo_ensemble):
        ref = GaussianReference(np.zeros(3), HARD_VAR * np.eye(3))
        opts = SolverOptions()
        sigma, res, it = sigma_of_alpha(0.5, demo_ensemble, ref, opts)
        assert res <= opts.inner_tol
        assert it >= 1
        assert np.linalg.eigvalsh(sigma)[0] > 0

    def test_alpha_zero_returns_reference(self, demo_ensemble):
        ref = GaussianReference(np.zeros(3), 2.0 * np.eye(3))
        sigma, res, _ = sigma_of_alpha(0.0, demo_ensemble, ref)
        np.testing.assert_array_equal(sigma, 2.0 * np.eye(3))
        assert res == 0.0

    def test_lost_positive_definiteness(self):
        # scalar, sigma0 = sigma_n = 1: the inverse form needs
        # 1 - alpha * s > 0 and s -> 1/4 at the center, so alpha = 8 exits
        # the cone immediately
        ens = ChannelEnsemble.from_arrays([[[1.0]]], [1.0])
        ref = GaussianReference(np.zeros(1), np.eye(1))
        with pytest.raises(LostPositiveDefiniteness):
            sigma_of_alpha(8.0, ens, ref)

    def test_kl_gap_at_zero(self, demo_ensemble):
        ref = GaussianReference(np.zeros(3), HARD_VAR * np.eye(3))
        assert kl_gap(0.0, demo_ensemble, ref, 0.3) == pytest.approx(-0.3, abs=1e-14)

    def test_kl_gap_grows_with_alpha(self, demo_ensemble):
        ref = GaussianReference(np.zeros(3), HARD_VAR * np.eye(3))
        g0 = kl_gap(0.0, demo_ensemble, ref, 0.0)
        g_up = kl_gap(0.2, demo_ensemble, ref, 0.0)
        g_dn = kl_gap(-0.2, demo_ensemble, ref, 0.0)
        assert g_up > g0
        assert g_dn > g0  # KL is a distance: it grows on both sides


class TestOptions:
    def test_rejects_bad_tolerances(self):
        with pytest.raises(ValueError):
            SolverOptions(inner_tol=0.0)
        with pytest.raises(ValueError):
            SolverOptions(outer_tol=-1e-9)
        with pytest.raises(ValueError):
            SolverOptions(inner_max_iter=0)
        with pytest.raises(ValueError):
            SolverOptions(damping=0.0)
        with pytest.raises(ValueError):
            SolverOptions(damping=1.5)

    def test_loose_outer_tolerance_respected(self, demo_ensemble):
        opts = SolverOptions(outer_tol=1e-6)
        ball = isotropic_ball(3, HARD_VAR, 0.2)
        res = solve_bound("upper", demo_ensemble, ball, opts)
        assert abs(res.kl_at_solution - 0.2) <= 1e-6
