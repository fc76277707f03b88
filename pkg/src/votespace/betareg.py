"""Affinity transforms and the mean-precision beta regression layer.

Latent distances are mapped into (0, 1] affinities; for each legislator the
affinities across bills follow Beta(mu*phi, (1-mu)*phi) with logit(mu) linear
in the bill covariates. ``phi`` is a single global precision so coefficient
magnitudes are comparable across legislators.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.special import digamma, expit, gammaln

from .config import ModelConfig
from .data import CovariateMatrix

#: Affinities are clamped to [BOUNDARY_EPS, 1 - BOUNDARY_EPS] before beta
#: evaluation: a zero distance yields an affinity of exactly 1, which has
#: zero beta density.
BOUNDARY_EPS = 1e-10

# numerical guard on fitted means so the beta parameters stay positive
_MU_EPS = 1e-12


class AffinityTransform(str, enum.Enum):
    """Strictly decreasing maps from distance in [0, inf) to (0, 1]."""

    EXP_NEG_D = "exp_neg_d"
    EXP_NEG_D_SQUARED = "exp_neg_d_squared"
    INVERSE_ONE_PLUS_D = "inverse_one_plus_d"


def affinity(transform: AffinityTransform | str, d):
    """Apply an affinity transform to distances (scalar or array)."""
    transform = AffinityTransform(transform)
    d = np.asarray(d, dtype=float)
    if not np.isfinite(d).all() or (d < 0).any():
        raise ValueError("distances must be finite and nonnegative")
    if transform is AffinityTransform.EXP_NEG_D:
        out = np.exp(-d)
    elif transform is AffinityTransform.EXP_NEG_D_SQUARED:
        out = np.exp(-d * d)
    else:
        out = 1.0 / (1.0 + d)
    # keep the codomain open at 0 even when exp underflows
    out = np.fmax(out, np.finfo(float).tiny)
    return float(out) if out.ndim == 0 else out


def clamp_affinity(t: np.ndarray) -> np.ndarray:
    return np.clip(t, BOUNDARY_EPS, 1.0 - BOUNDARY_EPS)


@dataclass
class RegressionState:
    """One draw of the regression layer: coefficient rows ``B`` (N, K) and
    global precision ``phi``."""

    B: np.ndarray
    phi: float

    def __post_init__(self):
        self.B = np.asarray(self.B, dtype=float)
        if self.B.ndim != 2:
            raise ValueError("B must be 2-d (legislators by covariates)")
        if not np.isfinite(self.B).all():
            raise ValueError("B contains non-finite entries")
        if not (self.phi > 0):
            raise ValueError("phi must be positive")

    def copy(self) -> "RegressionState":
        return RegressionState(self.B.copy(), self.phi)


def mu_of(x: np.ndarray, beta: np.ndarray) -> float:
    """Inverse-logit of the covariate/coefficient inner product."""
    x = np.asarray(x, dtype=float)
    beta = np.asarray(beta, dtype=float)
    if x.shape != beta.shape:
        raise ValueError("covariate and coefficient vectors differ in length")
    return float(expit(np.dot(x, beta)))


def mu_matrix(B: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Fitted means for every legislator-bill pair, shape (N, P)."""
    return np.clip(expit(B @ X.T), _MU_EPS, 1.0 - _MU_EPS)


def beta_logpdf_mean_precision(t, mu, phi):
    """Log Beta(mu*phi, (1-mu)*phi) density at ``t`` (scalar or array).

    ``t`` and ``mu`` must lie strictly inside (0, 1); exact-boundary
    affinities are the caller's responsibility (see ``clamp_affinity``).
    """
    t = np.asarray(t, dtype=float)
    mu = np.asarray(mu, dtype=float)
    if (t <= 0).any() or (t >= 1).any():
        raise ValueError("boundary affinity: t must lie strictly inside (0, 1)")
    if (mu <= 0).any() or (mu >= 1).any():
        raise ValueError("mu must lie strictly inside (0, 1)")
    if not phi > 0:
        raise ValueError("phi must be positive")
    p = mu * phi
    q = (1.0 - mu) * phi
    out = (
        gammaln(phi) - gammaln(p) - gammaln(q)
        + (p - 1.0) * np.log(t)
        + (q - 1.0) * np.log1p(-t)
    )
    return float(out) if out.ndim == 0 else out


def loglik_beta(
    T: np.ndarray,
    X: CovariateMatrix | np.ndarray,
    reg: RegressionState,
    clamp: bool = True,
) -> float:
    """Total beta log-likelihood of an affinity matrix.

    With ``clamp=False`` exact-boundary affinities raise instead of being
    pulled inside by ``BOUNDARY_EPS``.
    """
    Xv = X.values if isinstance(X, CovariateMatrix) else np.asarray(X, dtype=float)
    T = np.asarray(T, dtype=float)
    if T.shape != (reg.B.shape[0], Xv.shape[0]):
        raise ValueError("affinity matrix shape does not match B and X")
    if clamp:
        T = clamp_affinity(T)
    mu = mu_matrix(reg.B, Xv)
    return float(np.sum(beta_logpdf_mean_precision(T, mu, reg.phi)))


def loglik_beta_grad(
    T: np.ndarray,
    X: CovariateMatrix | np.ndarray,
    reg: RegressionState,
    clamp: bool = True,
) -> np.ndarray:
    """Gradient of :func:`loglik_beta` with respect to each coefficient,
    shape (N, K)."""
    Xv = X.values if isinstance(X, CovariateMatrix) else np.asarray(X, dtype=float)
    T = np.asarray(T, dtype=float)
    if clamp:
        T = clamp_affinity(T)
    mu = mu_matrix(reg.B, Xv)
    phi = reg.phi
    # d loglik / d mu, chained through the logit link
    score = phi * (np.log(T) - np.log1p(-T) - digamma(mu * phi) + digamma((1.0 - mu) * phi))
    return (score * mu * (1.0 - mu)) @ Xv


def coefficient_prior_precision(X: CovariateMatrix | np.ndarray, config: ModelConfig) -> np.ndarray:
    """Prior precision matrix of each coefficient row.

    Unit-information scaling ``X'X / g`` by default (``g = n_bills`` when the
    config leaves it unset); a diffuse isotropic alternative when configured.
    """
    Xv = X.values if isinstance(X, CovariateMatrix) else np.asarray(X, dtype=float)
    K = Xv.shape[1]
    if config.diffuse_coefficients:
        return np.eye(K) / config.sigma2_coefficient
    g = float(Xv.shape[0]) if config.g is None else config.g
    return (Xv.T @ Xv) / g


def gamma_logpdf(x: float, shape: float, rate: float) -> float:
    return float(
        shape * np.log(rate) - gammaln(shape) + (shape - 1.0) * np.log(x) - rate * x
    )


def logprior_regression(
    reg: RegressionState, X: CovariateMatrix | np.ndarray, config: ModelConfig
) -> float:
    """Zero-mean normal prior on each coefficient row plus a gamma prior on
    the precision parameter."""
    Q = coefficient_prior_precision(X, config)
    try:
        L = np.linalg.cholesky(Q)
    except np.linalg.LinAlgError:
        raise ValueError("coefficient prior precision X'X is not positive definite") from None
    N, K = reg.B.shape
    logdet_q = 2.0 * float(np.sum(np.log(np.diag(L))))
    quad = float(np.einsum("ik,kl,il->", reg.B, Q, reg.B))
    lp = N * 0.5 * (logdet_q - K * np.log(2.0 * np.pi)) - 0.5 * quad
    lp += gamma_logpdf(reg.phi, config.a_phi, config.b_phi)
    return lp
