"""Likelihood, priors, and distances for the latent-space vote model.

The response model is logistic: the log-odds of a supporting vote are
``a_i + b_j - gamma * d(z_i, w_j)`` with ``d`` the Euclidean distance between
legislator and bill positions in an S-dimensional space. Everything here is
pure and reentrant; the sampler and the evaluation code both build on it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit, gammaln

from .config import ModelConfig
from .data import MISSING, VoteMatrix

_LOG_2PI = float(np.log(2.0 * np.pi))
_P_LO = np.finfo(float).tiny
_P_HI = 1.0 - 2.0**-53


@dataclass
class LsirmState:
    """One draw of the latent-space parameters.

    ``a``: (N,) legislator intercepts; ``b``: (P,) bill intercepts;
    ``gamma``: positive distance weight; ``Z``: (N, S) legislator positions;
    ``W``: (P, S) bill positions; ``sigma2_a``/``sigma2_b``: intercept
    prior variances.
    """

    a: np.ndarray
    b: np.ndarray
    gamma: float
    Z: np.ndarray
    W: np.ndarray
    sigma2_a: float
    sigma2_b: float

    def __post_init__(self):
        self.a = np.asarray(self.a, dtype=float)
        self.b = np.asarray(self.b, dtype=float)
        self.Z = np.asarray(self.Z, dtype=float)
        self.W = np.asarray(self.W, dtype=float)
        if self.Z.ndim != 2 or self.W.ndim != 2 or self.Z.shape[1] != self.W.shape[1]:
            raise ValueError("Z and W must be 2-d with a common column count")
        if self.a.shape != (self.Z.shape[0],) or self.b.shape != (self.W.shape[0],):
            raise ValueError("intercept lengths must match position row counts")
        if not (self.gamma > 0):
            raise ValueError("gamma must be positive")
        if not (self.sigma2_a > 0 and self.sigma2_b > 0):
            raise ValueError("prior variances must be positive")

    @property
    def n_legislators(self) -> int:
        return self.Z.shape[0]

    @property
    def n_bills(self) -> int:
        return self.W.shape[0]

    @property
    def latent_dim(self) -> int:
        return self.Z.shape[1]

    def copy(self) -> "LsirmState":
        return LsirmState(
            self.a.copy(), self.b.copy(), self.gamma,
            self.Z.copy(), self.W.copy(), self.sigma2_a, self.sigma2_b,
        )


def distance_matrix(Z: np.ndarray, W: np.ndarray) -> np.ndarray:
    """All pairwise Euclidean distances, shape (N, P)."""
    diff = Z[:, None, :] - W[None, :, :]
    return np.sqrt(np.einsum("ijs,ijs->ij", diff, diff))


def distance(state: LsirmState, i: int, j: int) -> float:
    """Euclidean distance between legislator ``i`` and bill ``j``."""
    d = state.Z[i] - state.W[j]
    return float(np.sqrt(np.dot(d, d)))


def linear_predictor(state: LsirmState, D: np.ndarray | None = None) -> np.ndarray:
    if D is None:
        D = distance_matrix(state.Z, state.W)
    return state.a[:, None] + state.b[None, :] - state.gamma * D


def vote_prob_matrix(state: LsirmState, D: np.ndarray | None = None) -> np.ndarray:
    """Supporting-vote probabilities, clipped into the open unit interval."""
    return np.clip(expit(linear_predictor(state, D)), _P_LO, _P_HI)


def vote_prob(state: LsirmState, i: int, j: int) -> float:
    eta = state.a[i] + state.b[j] - state.gamma * distance(state, i, j)
    return float(np.clip(expit(eta), _P_LO, _P_HI))


def bernoulli_cell_loglik(eta: np.ndarray, cells: np.ndarray) -> np.ndarray:
    """Per-cell Bernoulli log-density given log-odds; 0 at missing cells."""
    used = cells != MISSING
    y = np.where(used, cells, 0).astype(float)
    # y*eta - log(1 + exp(eta)), evaluated stably
    ll = y * eta - np.logaddexp(0.0, eta)
    return np.where(used, ll, 0.0)


def loglik_votes(
    state: LsirmState, votes: VoteMatrix, imputed: np.ndarray | None = None
) -> float:
    """Sum of Bernoulli log-densities over observed cells.

    ``imputed``, when given, is an int8 overlay of the same shape with 0/1
    values at missing cells; those cells then contribute too.
    """
    cells = votes.cells
    if imputed is not None:
        cells = np.where(cells == MISSING, imputed, cells)
    eta = linear_predictor(state)
    return float(bernoulli_cell_loglik(eta, cells).sum())


def _normal_logpdf_sum(x: np.ndarray, var: float) -> float:
    x = np.asarray(x, dtype=float)
    return float(-0.5 * x.size * (_LOG_2PI + np.log(var)) - 0.5 * np.sum(x * x) / var)


def invgamma_logpdf(x: float, shape: float, scale: float) -> float:
    return float(
        shape * np.log(scale) - gammaln(shape) - (shape + 1.0) * np.log(x) - scale / x
    )


def logprior_lsirm(state: LsirmState, config: ModelConfig) -> float:
    """Joint log prior of the latent-space block.

    The distance-weight prior is a normal density evaluated in log(gamma)
    (the sampling coordinate), without a change-of-variables term.
    """
    lp = _normal_logpdf_sum(state.a, state.sigma2_a)
    lp += _normal_logpdf_sum(state.b, state.sigma2_b)
    lp += _normal_logpdf_sum(state.Z, 1.0)
    lp += _normal_logpdf_sum(state.W, 1.0)
    lp += _normal_logpdf_sum(
        np.log(state.gamma) - config.mu_gamma, config.sigma2_gamma
    )
    lp += invgamma_logpdf(state.sigma2_a, config.a_sigma, config.b_sigma)
    lp += invgamma_logpdf(state.sigma2_b, config.a_sigma, config.b_sigma)
    return lp
