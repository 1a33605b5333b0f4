"""Closed-form Gaussian quantities.

Estimator gain matrices, MMSE matrices and traces, same-mean Gaussian KL
divergence, and the exact MSE of a fixed affine estimator under an
arbitrary Gaussian prior. All solves go through symmetric factorizations;
KL is in nats.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .exceptions import DimensionMismatch, SingularReference, SingularSum


def _check_same_shape(a, b, name_a, name_b):
    if a.shape != b.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(
            f"{name_a} {a.shape} and {name_b} {b.shape} must be equal square shapes")


def weight_matrix(sigma_x, sigma_n):
    """Gain matrix W = Sigma_N (Sigma_X + Sigma_N)^-1.

    The conditional-mean estimator for a Gaussian prior is
    f(y) = (I - W) y + W mu_0.

    Parameters
    ----------
    sigma_x, sigma_n : (K, K) ndarray
        Prior and noise covariances, symmetric positive definite.

    Returns
    -------
    (K, K) ndarray
    """
    sigma_x = np.asarray(sigma_x, dtype=float)
    sigma_n = np.asarray(sigma_n, dtype=float)
    _check_same_shape(sigma_x, sigma_n, "sigma_x", "sigma_n")
    total = sigma_x + sigma_n
    try:
        c = cho_factor(0.5 * (total + total.T), lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise SingularSum(f"Sigma_X + Sigma_N factorization failed: {exc}") from exc
    # W^T = (Sigma_X + Sigma_N)^-1 Sigma_N
    return cho_solve(c, sigma_n, check_finite=False).T


def mmse_matrix(sigma_x, sigma_n):
    """MMSE matrix Sigma_X (Sigma_X + Sigma_N)^-1 Sigma_N.

    Equals Sigma_X W^T and, algebraically, (Sigma_X^-1 + Sigma_N^-1)^-1;
    symmetric positive definite for SPD inputs.
    """
    sigma_x = np.asarray(sigma_x, dtype=float)
    m = sigma_x @ weight_matrix(sigma_x, sigma_n).T
    return 0.5 * (m + m.T)


def mmse_trace(sigma_x, sigma_n) -> float:
    """Trace of the MMSE matrix; the scalar MMSE of the channel."""
    return float(np.trace(mmse_matrix(sigma_x, sigma_n)))


@dataclass(frozen=True)
class MmseSummary:
    """Per-channel MMSE matrices and traces with their weighted sum.

    `snr0` is Sigma_0^-1 Sigma_X when a reference was supplied, else None.
    """

    per_channel_matrix: tuple
    per_channel_trace: tuple
    weighted_sum: float
    snr0: np.ndarray | None = None


def weighted_mmse_sum(sigma_x, ensemble, reference=None) -> MmseSummary:
    """Weighted sum of per-channel MMSE traces for a common prior covariance.

    Parameters
    ----------
    sigma_x : (K, K) ndarray
        Prior covariance.
    ensemble : ChannelEnsemble
    reference : GaussianReference, optional
        When given, the summary also carries SNR_0 = Sigma_0^-1 Sigma_X.
    """
    sigma_x = np.asarray(sigma_x, dtype=float)
    if sigma_x.shape != (ensemble.dimension, ensemble.dimension):
        raise DimensionMismatch(
            f"sigma_x has shape {sigma_x.shape}, ensemble dimension is "
            f"{ensemble.dimension}")
    matrices, traces = [], []
    for ch in ensemble.channels:
        m = mmse_matrix(sigma_x, ch.noise_covariance)
        matrices.append(m)
        traces.append(float(np.trace(m)))
    weighted = float(np.dot(ensemble.weights, traces))
    snr0 = None
    if reference is not None:
        sigma0 = np.asarray(reference.covariance, dtype=float)
        try:
            c = cho_factor(sigma0, lower=True, check_finite=False)
        except np.linalg.LinAlgError as exc:
            raise SingularReference(str(exc)) from exc
        snr0 = cho_solve(c, sigma_x, check_finite=False)
    return MmseSummary(tuple(matrices), tuple(traces), weighted, snr0)


def kl_same_mean_gaussians(sigma_x, sigma_0) -> float:
    """KL divergence (nats) between same-mean Gaussians N(m, Sigma_X), N(m, Sigma_0).

    Equals (tr(SNR_0) - K - log det(SNR_0)) / 2 with SNR_0 = Sigma_0^-1 Sigma_X.
    Nonnegative; zero iff the covariances coincide.
    """
    sigma_x = np.asarray(sigma_x, dtype=float)
    sigma_0 = np.asarray(sigma_0, dtype=float)
    _check_same_shape(sigma_x, sigma_0, "sigma_x", "sigma_0")
    k = sigma_x.shape[0]
    try:
        c0 = cho_factor(sigma_0, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise SingularReference(f"reference covariance factorization failed: {exc}") from exc
    snr0 = cho_solve(c0, sigma_x, check_finite=False)
    trace = float(np.trace(snr0))
    sign_x, logdet_x = np.linalg.slogdet(sigma_x)
    if sign_x <= 0:
        raise SingularSum("sigma_x has nonpositive determinant")
    logdet_0 = 2.0 * float(np.sum(np.log(np.diag(c0[0]))))
    value = 0.5 * (trace - k - (logdet_x - logdet_0))
    return max(value, 0.0)


@dataclass(frozen=True)
class LinearEstimator:
    """Affine estimator y -> (I - W) y + W mu_0."""

    gain: np.ndarray
    anchor: np.ndarray


def linear_estimate(est: LinearEstimator, y):
    """Apply the affine estimator to one observation or a batch.

    `y` may be a length-K vector or an (n, K) batch.
    """
    w = np.asarray(est.gain, dtype=float)
    mu0 = np.asarray(est.anchor, dtype=float)
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != w.shape[0] or mu0.shape[0] != w.shape[0]:
        raise DimensionMismatch(
            f"estimator gain {w.shape}, anchor {mu0.shape}, observation {y.shape}")
    return y - y @ w.T + mu0 @ w.T


def linear_estimator_mse(w, prior_cov, sigma_n) -> float:
    """Exact MSE of the fixed affine estimator (I - W) y + W mu_0.

    Valid for any prior with mean mu_0 and covariance `prior_cov` under
    noise N(0, Sigma_N): the error is -W (X - mu_0) + (I - W) N, so the MSE
    is tr(W Sigma W^T) + tr((I - W) Sigma_N (I - W)^T) regardless of the
    prior's shape beyond its first two moments.
    """
    w = np.asarray(w, dtype=float)
    prior_cov = np.asarray(prior_cov, dtype=float)
    sigma_n = np.asarray(sigma_n, dtype=float)
    _check_same_shape(prior_cov, sigma_n, "prior_cov", "sigma_n")
    if w.shape != prior_cov.shape:
        raise DimensionMismatch(f"gain shape {w.shape} != covariance shape "
                                f"{prior_cov.shape}")
    iw = np.eye(w.shape[0]) - w
    return float(np.sum((w @ prior_cov) * w) + np.sum((iw @ sigma_n) * iw))
