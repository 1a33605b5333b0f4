"""Monte Carlo oracle: estimates of true MMSEs and KL divergences.

Built to verify the analytic machinery independently, at desk scale. The
conditional mean E[X | Y = y] is approximated by self-normalized
importance sampling whose proposal is the Gaussian posterior one would
obtain if the prior were its own moment-matched Gaussian; for the families
in this package that posterior sits on the true posterior mass at the
noise levels of interest.

Randomness comes from the counter-based Philox generator through
`SeedSequence` spawning, so every estimate is bit-reproducible from the
recorded integer seed and independent streams never overlap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateWeights
from .gaussian import mmse_matrix, weight_matrix
from .priors import PriorSpec, _sample_with, gaussian_log_density, log_density, prior_moments

_CHUNK = 128  # outer draws processed per vectorized block


@dataclass(frozen=True)
class McEstimate:
    """A Monte Carlo value with its standard error and provenance."""

    value: float
    std_error: float
    n_outer: int
    n_inner: int
    seed: int


def _rng_from(seed_seq) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed_seq))


def _mmse_one_channel(spec, sigma_n, x, y, inner_seed, n_inner):
    """Mean squared conditional-mean error over given (x, y) pairs.

    Returns (squared_errors, bad_proposal_count): per-draw ||E[X|y] - x||^2
    and how many draws had inner effective sample size below 1% of n_inner.
    """
    moments = prior_moments(spec)
    m, c = moments.mean, moments.covariance
    k = x.shape[1]
    n_outer = x.shape[0]

    w = weight_matrix(c, sigma_n)
    c_post = mmse_matrix(c, sigma_n)
    chol_post = np.linalg.cholesky(c_post)
    gain = np.eye(k) - w  # posterior mean = m + (I - W)(y - m)

    rng = _rng_from(inner_seed)
    sq_err = np.empty(n_outer)
    n_bad = 0
    for start in range(0, n_outer, _CHUNK):
        stop = min(start + _CHUNK, n_outer)
        yc = y[start:stop]
        b = yc.shape[0]
        m_post = m + (yc - m) @ gain.T  # (b, K)
        z = rng.standard_normal((b, n_inner, k))
        xs = m_post[:, None, :] + z @ chol_post.T  # proposal draws
        flat = xs.reshape(-1, k)
        log_w = (log_density(spec, flat)
                 + gaussian_log_density(np.zeros(k), sigma_n,
                                        np.repeat(yc, n_inner, axis=0) - flat)
                 - gaussian_log_density(np.zeros(k), c_post,
                                        flat - np.repeat(m_post, n_inner, axis=0)))
        log_w = log_w.reshape(b, n_inner)
        row_max = log_w.max(axis=1, keepdims=True)
        row_max = np.where(np.isfinite(row_max), row_max, 0.0)
        wts = np.exp(log_w - row_max)
        totals = wts.sum(axis=1)
        sq_totals = (wts**2).sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            ess = np.where(sq_totals > 0, totals**2 / sq_totals, 0.0)
        n_bad += int(np.count_nonzero(ess < 0.01 * n_inner))
        x_hat = (wts[:, :, None] * xs).sum(axis=1) / totals[:, None]
        sq_err[start:stop] = np.sum((x_hat - x[start:stop]) ** 2, axis=1)
    return sq_err, n_bad


def _check_degenerate(n_bad, n_outer, n_inner):
    if n_bad > 0.01 * n_outer:
        raise DegenerateWeights(
            f"inner effective sample size fell below 0.01*n_inner on "
            f"{n_bad}/{n_outer} outer draws; the moment-matched proposal is a "
            f"bad fit for this prior/noise pair", bad_fraction=n_bad / n_outer)


def mc_mmse(spec: PriorSpec, sigma_n, n_outer: int, n_inner: int, seed: int) -> McEstimate:
    """Monte Carlo estimate of the channel MMSE under the given prior.

    Outer loop: draw (x, y = x + n). Inner loop: self-normalized importance
    sampling for E[X | Y = y]. The value is the average of
    ||x_hat(y) - x||^2 and the standard error is the outer-sample standard
    deviation over sqrt(n_outer).

    Raises
    ------
    DegenerateWeights
        If the inner effective sample size collapses on more than 1% of
        outer draws (reported, not silently retried).
    """
    if n_outer < 100 or n_inner < 100:
        raise ValueError("n_outer and n_inner must both be >= 100")
    sigma_n = np.asarray(sigma_n, dtype=float)
    root = np.random.SeedSequence(seed)
    s_x, s_noise, s_inner = root.spawn(3)
    x = _sample_with(spec, n_outer, _rng_from(s_x))
    chol_n = np.linalg.cholesky(sigma_n)
    y = x + _rng_from(s_noise).standard_normal(x.shape) @ chol_n.T

    sq_err, n_bad = _mmse_one_channel(spec, sigma_n, x, y, s_inner, n_inner)
    _check_degenerate(n_bad, n_outer, n_inner)
    value = float(sq_err.mean())
    std_error = float(sq_err.std(ddof=1) / math.sqrt(n_outer))
    return McEstimate(value, std_error, n_outer, n_inner, seed)


def mc_weighted_sum(spec: PriorSpec, ensemble, n_outer: int, n_inner: int,
                    seed: int) -> McEstimate:
    """Weighted MMSE sum across the ensemble, sharing outer x draws.

    The same prior draws feed every channel (common random numbers), each
    channel gets its own noise and inner streams, and standard errors
    combine in quadrature: sqrt(sum_j (lambda_j SE_j)^2).
    """
    if n_outer < 100 or n_inner < 100:
        raise ValueError("n_outer and n_inner must both be >= 100")
    root = np.random.SeedSequence(seed)
    s_x, *chan_seeds = root.spawn(1 + 2 * ensemble.count)
    x = _sample_with(spec, n_outer, _rng_from(s_x))

    value = 0.0
    var = 0.0
    total_bad = 0
    for j, ch in enumerate(ensemble.channels):
        sigma_n = ch.noise_covariance
        s_noise, s_inner = chan_seeds[2 * j], chan_seeds[2 * j + 1]
        chol_n = np.linalg.cholesky(sigma_n)
        y = x + _rng_from(s_noise).standard_normal(x.shape) @ chol_n.T
        sq_err, n_bad = _mmse_one_channel(spec, sigma_n, x, y, s_inner, n_inner)
        total_bad += n_bad
        se_j = float(sq_err.std(ddof=1) / math.sqrt(n_outer))
        value += ch.weight * float(sq_err.mean())
        var += (ch.weight * se_j) ** 2
    _check_degenerate(total_bad, n_outer * ensemble.count, n_inner)
    return McEstimate(value, math.sqrt(var), n_outer, n_inner, seed)


def mc_kl(spec: PriorSpec, gaussian, n: int, seed: int) -> McEstimate:
    """Monte Carlo KL divergence from the prior to a Gaussian.

    Averages log prior_density(x) - log gaussian_density(x) over x drawn
    from the prior. `gaussian` is a GaussianReference.
    """
    if n < 100:
        raise ValueError("n must be >= 100")
    root = np.random.SeedSequence(seed)
    x = _sample_with(spec, n, _rng_from(root))
    terms = (log_density(spec, x)
             - gaussian_log_density(np.asarray(gaussian.mean, dtype=float),
                                    np.asarray(gaussian.covariance, dtype=float), x))
    value = float(terms.mean())
    std_error = float(terms.std(ddof=1) / math.sqrt(n))
    return McEstimate(value, std_error, n, 0, seed)
