"""Analytic prior families: moments, Fisher information, KL to the best
Gaussian approximation, log densities, and samplers.

Families
--------
Gaussian(mean, covariance)
    The reference family itself.
GeneralizedGaussian(p)
    Radially symmetric density c_p exp(-||x||^p / p); standard Gaussian at
    p = 2, heavy-tailed for p < 2, compactly concentrated for p > 2.
UniformBall(radius)
    Uniform distribution on the centered K-ball of the given radius.

All gamma-function arithmetic runs in log space: Gamma(K/p) overflows in
double precision for small p. The best Gaussian approximation (in
D_KL(P || Q) over Gaussians Q) of a zero-mean family is the moment-matched
zero-mean Gaussian, so epsilon here is always the KL to the moment match.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .exceptions import DegenerateSample, DimensionMismatch, FisherUndefined
from .problem import GaussianReference


@dataclass(frozen=True)
class Gaussian:
    mean: np.ndarray
    covariance: np.ndarray


@dataclass(frozen=True)
class GeneralizedGaussian:
    p: float

    def __post_init__(self):
        if not self.p > 0:
            raise ValueError(f"exponent p must be positive, got {self.p}")


@dataclass(frozen=True)
class UniformBall:
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius}")


@dataclass(frozen=True)
class PriorSpec:
    """A prior family instance in dimension K."""

    family: Gaussian | GeneralizedGaussian | UniformBall
    dimension: int

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")


@dataclass(frozen=True)
class PriorMoments:
    """First two moments plus Fisher information and the KL radius.

    `fisher` and `epsilon_to_best_gaussian` are None when undefined for the
    family (e.g. the uniform ball's density has a boundary discontinuity,
    so its Fisher information does not exist).
    """

    mean: np.ndarray
    covariance: np.ndarray
    fisher: float | None
    epsilon_to_best_gaussian: float | None


def gen_gauss_covariance(p: float, k: int) -> float:
    """Per-coordinate variance of the generalized Gaussian: covariance is
    sigma^2 I with sigma^2 = p^(2/p) Gamma((K+2)/p) / (K Gamma(K/p))."""
    if not p > 0 or k < 1:
        raise ValueError("need p > 0 and K >= 1")
    log_val = ((2.0 / p) * math.log(p) + gammaln((k + 2.0) / p)
               - math.log(k) - gammaln(k / p))
    return float(math.exp(log_val))


def gen_gauss_fisher(p: float, k: int) -> float:
    """Fisher information J(X) = p^((2p-2)/p) Gamma((K+2p-2)/p) / Gamma(K/p).

    Raises FisherUndefined when (K + 2p - 2)/p <= 0, i.e. the defining
    integral diverges (possible only for K = 1 and p <= 1/2).
    """
    if not p > 0 or k < 1:
        raise ValueError("need p > 0 and K >= 1")
    arg = (k + 2.0 * p - 2.0) / p
    if arg <= 0:
        raise FisherUndefined(
            f"generalized Gaussian with p={p}, K={k} has no finite Fisher "
            f"information (gamma argument {arg} <= 0)")
    log_val = ((2.0 * p - 2.0) / p) * math.log(p) + gammaln(arg) - gammaln(k / p)
    return float(math.exp(log_val))


def gen_gauss_epsilon(p: float, k: int) -> float:
    """KL divergence from the generalized Gaussian to its moment-matched
    Gaussian N(0, sigma^2(p, K) I); zero exactly at p = 2.

    Negative rounding noise is clamped to zero; values below -1e-12 trigger
    a diagnostic warning first, since the quantity is a KL divergence and a
    genuinely negative result would mean an evaluation bug.
    """
    if not p > 0 or k < 1:
        raise ValueError("need p > 0 and K >= 1")
    sigma2 = gen_gauss_covariance(p, k)
    # log c_p = -log(S_{K-1} p^(K/p - 1) Gamma(K/p)), S_{K-1} = 2 pi^(K/2) / Gamma(K/2)
    log_sphere = math.log(2.0) + 0.5 * k * math.log(math.pi) - gammaln(0.5 * k)
    log_cp = -(log_sphere + (k / p - 1.0) * math.log(p) + gammaln(k / p))
    # E||X||^p = K by the radial Gamma identity, and E||X||^2 = K sigma^2
    # by construction, so the entropy and quadratic terms reduce to -K/p
    # and K/2 exactly
    value = (log_cp - k / p
             + 0.5 * k * math.log(2.0 * math.pi * sigma2)
             + 0.5 * k)
    if value < -1e-12:
        warnings.warn(
            f"gen_gauss_epsilon({p}, {k}) evaluated to {value!r} < 0; clamping "
            f"to 0, but this indicates a formula or precision problem",
            RuntimeWarning)
    return max(value, 0.0)


def uniform_ball_moments(radius: float, k: int) -> PriorMoments:
    """Moments of the uniform distribution on the K-ball of given radius.

    Mean zero, covariance (R^2/(K+2)) I; Fisher information undefined
    because of the density's jump at the boundary.
    """
    if not radius > 0 or k < 1:
        raise ValueError("need radius > 0 and K >= 1")
    var = radius**2 / (k + 2.0)
    return PriorMoments(
        mean=np.zeros(k),
        covariance=var * np.eye(k),
        fisher=None,
        epsilon_to_best_gaussian=uniform_ball_epsilon(radius, k),
    )


def uniform_ball_epsilon(radius: float, k: int) -> float:
    """KL from Uniform(B_K(R)) to its moment match N(0, (R^2/(K+2)) I).

    Closed form -log V_K(R) + (K/2) log(2 pi R^2/(K+2)) + K/2 with
    V_K(R) = pi^(K/2) R^K / Gamma(K/2 + 1); scale-invariant, so the value
    depends only on K.
    """
    if not radius > 0 or k < 1:
        raise ValueError("need radius > 0 and K >= 1")
    log_vk = 0.5 * k * math.log(math.pi) + k * math.log(radius) - gammaln(0.5 * k + 1.0)
    value = (-log_vk + 0.5 * k * math.log(2.0 * math.pi * radius**2 / (k + 2.0))
             + 0.5 * k)
    return max(value, 0.0)


def prior_moments(spec: PriorSpec) -> PriorMoments:
    """Analytic moments for any family."""
    k = spec.dimension
    fam = spec.family
    if isinstance(fam, Gaussian):
        mean = np.asarray(fam.mean, dtype=float).reshape(-1)
        cov = np.asarray(fam.covariance, dtype=float)
        if mean.shape != (k,) or cov.shape != (k, k):
            raise DimensionMismatch(
                f"Gaussian family shapes {mean.shape}, {cov.shape} do not match K={k}")
        return PriorMoments(mean, cov, fisher=None, epsilon_to_best_gaussian=0.0)
    if isinstance(fam, GeneralizedGaussian):
        sigma2 = gen_gauss_covariance(fam.p, k)
        try:
            fisher = gen_gauss_fisher(fam.p, k)
        except FisherUndefined:
            fisher = None
        return PriorMoments(np.zeros(k), sigma2 * np.eye(k), fisher,
                            gen_gauss_epsilon(fam.p, k))
    if isinstance(fam, UniformBall):
        return uniform_ball_moments(fam.radius, k)
    raise TypeError(f"unknown prior family {fam!r}")


def log_density(spec: PriorSpec, x) -> np.ndarray:
    """Log density evaluated row-wise on an (n, K) array (or a single point)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    k = spec.dimension
    if x.shape[1] != k:
        raise DimensionMismatch(f"points have dimension {x.shape[1]}, spec has {k}")
    fam = spec.family
    if isinstance(fam, Gaussian):
        return gaussian_log_density(np.asarray(fam.mean, dtype=float),
                                    np.asarray(fam.covariance, dtype=float), x)
    if isinstance(fam, GeneralizedGaussian):
        p = fam.p
        log_sphere = math.log(2.0) + 0.5 * k * math.log(math.pi) - gammaln(0.5 * k)
        log_cp = -(log_sphere + (k / p - 1.0) * math.log(p) + gammaln(k / p))
        r = np.linalg.norm(x, axis=1)
        return log_cp - r**p / p
    if isinstance(fam, UniformBall):
        log_vk = (0.5 * k * math.log(math.pi) + k * math.log(fam.radius)
                  - gammaln(0.5 * k + 1.0))
        inside = np.linalg.norm(x, axis=1) <= fam.radius
        out = np.full(x.shape[0], -np.inf)
        out[inside] = -log_vk
        return out
    raise TypeError(f"unknown prior family {fam!r}")


def gaussian_log_density(mean, cov, x) -> np.ndarray:
    """Multivariate normal log density, row-wise."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    k = x.shape[1]
    chol = np.linalg.cholesky(cov)
    diff = x - mean
    z = np.linalg.solve(chol, diff.T)
    logdet = 2.0 * float(np.sum(np.log(np.diag(chol))))
    return -0.5 * (k * math.log(2.0 * math.pi) + logdet + np.sum(z * z, axis=0))


def sample_prior(spec: PriorSpec, n: int, seed) -> np.ndarray:
    """Draw n samples; deterministic for a given seed.

    The generalized Gaussian is sampled radially: a uniform direction on
    the sphere times r = (p g)^(1/p) with g ~ Gamma(K/p, 1), which follows
    from the radial density being proportional to r^(K-1) exp(-r^p / p).
    The ball radius uses the usual u^(1/K) volume transform.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.Generator(np.random.Philox(seed))
    return _sample_with(spec, n, rng)


def _sample_with(spec: PriorSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    k = spec.dimension
    fam = spec.family
    if isinstance(fam, Gaussian):
        chol = np.linalg.cholesky(np.asarray(fam.covariance, dtype=float))
        z = rng.standard_normal((n, k))
        return np.asarray(fam.mean, dtype=float) + z @ chol.T
    z = rng.standard_normal((n, k))
    norms = np.linalg.norm(z, axis=1, keepdims=True)
    directions = z / norms
    if isinstance(fam, GeneralizedGaussian):
        g = rng.gamma(shape=k / fam.p, scale=1.0, size=n)
        r = (fam.p * g) ** (1.0 / fam.p)
        return directions * r[:, None]
    if isinstance(fam, UniformBall):
        u = rng.random(n)
        r = fam.radius * u ** (1.0 / k)
        return directions * r[:, None]
    raise TypeError(f"unknown prior family {fam!r}")


def moment_match(samples) -> GaussianReference:
    """Moment-matched Gaussian of an (n, K) sample: mean and biased (1/n)
    covariance, symmetrized.

    Raises DegenerateSample when the sample covariance is numerically
    singular (smallest eigenvalue below 1e-12 of the average variance).
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2:
        raise DimensionMismatch(f"samples must be (n, K), got shape {samples.shape}")
    n, k = samples.shape
    if n < k + 1:
        raise DegenerateSample(f"need at least K+1={k + 1} samples, got {n}")
    mean = samples.mean(axis=0)
    centered = samples - mean
    cov = centered.T @ centered / n
    cov = 0.5 * (cov + cov.T)
    eigs = np.linalg.eigvalsh(cov)
    if eigs[0] < 1e-12 * max(np.trace(cov) / k, np.finfo(float).tiny):
        raise DegenerateSample(
            f"sample covariance is numerically singular (min eigenvalue {eigs[0]:.3e})")
    return GaussianReference(mean, cov)
