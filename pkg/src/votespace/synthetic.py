"""Ground-truth data generation and a brute-force posterior oracle.

The generator mirrors the model's own generative story: party-clustered
legislator positions, cluster-structured bill positions with cluster-specific
topic profiles, logistic votes driven by intercepts minus scaled distances,
and uniform missingness. The oracle recomputes the joint log posterior by
naive per-term summation with no shared helpers, for desk-scale equivalence
checks against the fast kernels.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .betareg import RegressionState
from .config import ModelConfig
from .data import (
    MISSING,
    NOT_YEA,
    YEA,
    CovariateMatrix,
    PartyRoster,
    VoteMatrix,
)
from .lsirm import LsirmState
from .rng import substream


@dataclass
class PartyBlueprint:
    labels: tuple = ("Alpha", "Beta", "Gamma")
    weights: tuple = (0.4, 0.4, 0.2)
    centroids: tuple = ((-1.3, -0.2), (1.3, -0.2), (0.0, 1.9))
    spread: float = 0.25


@dataclass
class BillClusterBlueprint:
    """Bill positions are cluster centers displaced by topic content.

    Each bill draws a topic simplex from its cluster's Dirichlet; the
    deviation of that draw from the cluster's mean profile is mapped into
    the latent space through ``topic_anchors`` (one direction per topic), so
    issue content carries continuous positional signal on top of the
    cluster geometry. ``spreads`` adds isotropic noise per cluster.
    """

    centers: tuple = ((-0.55, 0.1), (0.75, -0.5))
    spreads: tuple = (0.35, 0.35)
    # Dirichlet concentrations of the full topic simplex, one row per cluster
    topic_alphas: tuple = ((3.0, 1.0, 0.5, 0.5), (0.5, 0.5, 2.5, 1.5))
    # latent direction associated with each topic (rows: topics)
    topic_anchors: tuple = ((-3.64, -1.68), (3.64, -1.68), (1.4, 3.64), (-1.4, 3.08))


@dataclass
class SyntheticSpec:
    """Blueprint for one synthetic instance; all sizes strictly positive."""

    n_legislators: int = 40
    n_bills: int = 120
    latent_dim: int = 2
    parties: PartyBlueprint = field(default_factory=PartyBlueprint)
    bills: BillClusterBlueprint = field(default_factory=BillClusterBlueprint)
    a_loc: float = 0.0
    a_scale: float = 0.2
    b_loc: float = 6.0
    b_scale: float = 0.4
    gamma: float = 3.0
    beta: np.ndarray | None = None   # recorded in the truth file, not used to vote
    phi: float = 50.0
    missing_rate: float = 0.05
    seed: int = 1234

    def __post_init__(self):
        if min(self.n_legislators, self.n_bills, self.latent_dim) < 1:
            raise ValueError("counts must be positive")
        if not 0.0 <= self.missing_rate < 1.0:
            raise ValueError("missing_rate must lie in [0, 1)")
        if self.gamma <= 0 or self.phi <= 0:
            raise ValueError("gamma and phi must be positive")
        if len(self.parties.labels) != len(self.parties.weights):
            raise ValueError("party labels and weights differ in length")
        if abs(sum(self.parties.weights) - 1.0) > 1e-9:
            raise ValueError("party weights must sum to 1")

    @property
    def n_topics(self) -> int:
        return len(self.bills.topic_alphas[0])

    @property
    def n_covariates(self) -> int:
        # intercept plus reference-coded topic proportions
        return self.n_topics


@dataclass
class TruthRecord:
    """Everything needed to recompute each generated vote probability."""

    a: np.ndarray
    b: np.ndarray
    gamma: float
    Z: np.ndarray
    W: np.ndarray
    party_of: tuple
    cluster_of: tuple
    beta: np.ndarray
    phi: float

    def distances(self) -> np.ndarray:
        diff = self.Z[:, None, :] - self.W[None, :, :]
        return np.sqrt((diff**2).sum(axis=2))

    def vote_probs(self) -> np.ndarray:
        eta = self.a[:, None] + self.b[None, :] - self.gamma * self.distances()
        return 1.0 / (1.0 + np.exp(-eta))


def _split_counts(total: int, weights: tuple) -> list:
    """Largest-remainder apportionment of ``total`` units over ``weights``."""
    raw = np.asarray(weights, dtype=float) * total
    counts = np.floor(raw).astype(int)
    remainder = total - counts.sum()
    order = np.argsort(-(raw - counts))
    for k in range(remainder):
        counts[order[k]] += 1
    return counts.tolist()


def generate(spec: SyntheticSpec):
    """Draw one instance: returns (votes, covariates, roster, truth)."""
    rng = substream(spec.seed, "simulate")
    S = spec.latent_dim

    counts = _split_counts(spec.n_legislators, spec.parties.weights)
    empty = [lab for lab, c in zip(spec.parties.labels, counts) if c == 0]
    if empty:
        raise ValueError(f"blueprint yields empty parties: {empty}")
    party_of = []
    for lab, c in zip(spec.parties.labels, counts):
        party_of.extend([lab] * c)
    centroids = np.asarray(spec.parties.centroids, dtype=float)[:, :S]
    Z = np.concatenate([
        centroids[k] + spec.parties.spread * rng.standard_normal((c, S))
        for k, c in enumerate(counts)
    ])

    n_clusters = len(spec.bills.centers)
    bill_counts = _split_counts(spec.n_bills, tuple([1.0 / n_clusters] * n_clusters))
    cluster_of = []
    for k, c in enumerate(bill_counts):
        cluster_of.extend([k] * c)
    centers = np.asarray(spec.bills.centers, dtype=float)[:, :S]
    alphas = np.asarray(spec.bills.topic_alphas, dtype=float)
    anchors = np.asarray(spec.bills.topic_anchors, dtype=float)[:, :S]
    profiles = alphas / alphas.sum(axis=1, keepdims=True)
    simplex = np.vstack([rng.dirichlet(alphas[k]) for k in cluster_of])
    cluster_idx = np.asarray(cluster_of)
    W = (centers[cluster_idx]
         + (simplex - profiles[cluster_idx]) @ anchors
         + np.asarray(spec.bills.spreads, dtype=float)[cluster_idx, None]
         * rng.standard_normal((spec.n_bills, S)))

    a = spec.a_loc + spec.a_scale * rng.standard_normal(spec.n_legislators)
    b = spec.b_loc + spec.b_scale * rng.standard_normal(spec.n_bills)

    beta = spec.beta
    if beta is None:
        beta = np.zeros((spec.n_legislators, spec.n_covariates))
    truth = TruthRecord(a, b, spec.gamma, Z, W, tuple(party_of),
                        tuple(cluster_of), np.asarray(beta, dtype=float), spec.phi)

    probs = truth.vote_probs()
    cells = np.where(rng.random(probs.shape) < probs, YEA, NOT_YEA).astype(np.int8)
    if spec.missing_rate > 0:
        cells[rng.random(probs.shape) < spec.missing_rate] = MISSING

    leg_ids = tuple(f"L{i + 1:03d}" for i in range(spec.n_legislators))
    bill_ids = tuple(f"B{j + 1:03d}" for j in range(spec.n_bills))
    votes = VoteMatrix(cells, leg_ids, bill_ids)
    roster = PartyRoster(dict(zip(leg_ids, party_of)))

    X = np.column_stack([np.ones(spec.n_bills), simplex[:, :-1]])
    names = ("intercept",) + tuple(f"topic_{t + 1}" for t in range(spec.n_topics - 1))
    covariates = CovariateMatrix(
        X, names, bill_ids,
        intercept_column=0,
        simplex_columns=tuple(range(1, spec.n_topics)),
    )
    return votes, covariates, roster, truth


def write_truth(truth: TruthRecord, path: str | Path) -> None:
    """Long-format delimited dump of the truth record."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["block", "row", "col", "value"])
        writer.writerow(["gamma", "", "", repr(float(truth.gamma))])
        writer.writerow(["phi", "", "", repr(float(truth.phi))])
        for i, v in enumerate(truth.a):
            writer.writerow(["a", i, "", repr(float(v))])
        for j, v in enumerate(truth.b):
            writer.writerow(["b", j, "", repr(float(v))])
        for name, M in (("Z", truth.Z), ("W", truth.W), ("beta", truth.beta)):
            for i in range(M.shape[0]):
                for j in range(M.shape[1]):
                    writer.writerow([name, i, j, repr(float(M[i, j]))])
        for i, lab in enumerate(truth.party_of):
            writer.writerow(["party", i, "", lab])
        for j, lab in enumerate(truth.cluster_of):
            writer.writerow(["cluster", j, "", lab])


# ---------------------------------------------------------------------------
# Brute-force oracle. Deliberately naive: python loops, math.* scalar calls,
# and an explicit matrix inverse; shares no helpers with the fast kernels.
# ---------------------------------------------------------------------------

_ORACLE_T_EPS = 1e-10
_ORACLE_MU_EPS = 1e-12


def _oracle_norm_lpdf(x: float, mean: float, var: float) -> float:
    return -0.5 * math.log(2.0 * math.pi * var) - (x - mean) ** 2 / (2.0 * var)


def oracle_log_posterior(
    ls: LsirmState,
    reg: RegressionState,
    votes: VoteMatrix,
    X: CovariateMatrix,
    config: ModelConfig,
    imputed: np.ndarray | None = None,
) -> float:
    """Recompute the unnormalized joint log posterior term by term.

    Intended for tiny instances only; cost grows like N*P python loops.
    """
    N, P = votes.n_legislators, votes.n_bills
    S = ls.Z.shape[1]
    K = X.n_covariates
    total = 0.0

    # roll-call likelihood
    for i in range(N):
        for j in range(P):
            y = int(votes.cells[i, j])
            if y == MISSING and imputed is not None:
                y = int(imputed[i, j])
            if y == MISSING:
                continue
            d = math.sqrt(sum((ls.Z[i, s] - ls.W[j, s]) ** 2 for s in range(S)))
            eta = ls.a[i] + ls.b[j] - ls.gamma * d
            total += y * eta - float(np.logaddexp(0.0, eta))

    # affinity-regression likelihood
    if config.include_regression:
        for i in range(N):
            for j in range(P):
                d = math.sqrt(sum((ls.Z[i, s] - ls.W[j, s]) ** 2 for s in range(S)))
                if config.transform == "exp_neg_d":
                    t = math.exp(-d)
                elif config.transform == "exp_neg_d_squared":
                    t = math.exp(-d * d)
                else:
                    t = 1.0 / (1.0 + d)
                t = min(max(t, _ORACLE_T_EPS), 1.0 - _ORACLE_T_EPS)
                xb = sum(X.values[j, k] * reg.B[i, k] for k in range(K))
                mu = 1.0 / (1.0 + math.exp(-xb))
                mu = min(max(mu, _ORACLE_MU_EPS), 1.0 - _ORACLE_MU_EPS)
                p = mu * reg.phi
                q = (1.0 - mu) * reg.phi
                total += (
                    math.lgamma(reg.phi) - math.lgamma(p) - math.lgamma(q)
                    + (p - 1.0) * math.log(t) + (q - 1.0) * math.log1p(-t)
                )

    # latent-space priors
    for i in range(N):
        total += _oracle_norm_lpdf(ls.a[i], 0.0, ls.sigma2_a)
        for s in range(S):
            total += _oracle_norm_lpdf(ls.Z[i, s], 0.0, 1.0)
    for j in range(P):
        total += _oracle_norm_lpdf(ls.b[j], 0.0, ls.sigma2_b)
        for s in range(S):
            total += _oracle_norm_lpdf(ls.W[j, s], 0.0, 1.0)
    total += _oracle_norm_lpdf(math.log(ls.gamma), config.mu_gamma, config.sigma2_gamma)
    for var in (ls.sigma2_a, ls.sigma2_b):
        total += (
            config.a_sigma * math.log(config.b_sigma)
            - math.lgamma(config.a_sigma)
            - (config.a_sigma + 1.0) * math.log(var)
            - config.b_sigma / var
        )

    # coefficient prior via an explicit covariance inverse
    if config.diffuse_coefficients:
        cov = config.sigma2_coefficient * np.eye(K)
    else:
        g = float(P) if config.g is None else config.g
        cov = g * np.linalg.inv(X.values.T @ X.values)
    cov_inv = np.linalg.inv(cov)
    sign, logdet = np.linalg.slogdet(cov)
    for i in range(N):
        quad = float(reg.B[i] @ cov_inv @ reg.B[i])
        total += -0.5 * (K * math.log(2.0 * math.pi) + logdet + quad)

    # precision prior
    total += (
        config.a_phi * math.log(config.b_phi)
        - math.lgamma(config.a_phi)
        + (config.a_phi - 1.0) * math.log(reg.phi)
        - config.b_phi * reg.phi
    )
    return total
