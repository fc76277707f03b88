"""One-stage Metropolis-within-Gibbs sampler for the joint model.

Each iteration (1) imputes missing votes from the current Bernoulli
probabilities, (2) random-walk updates the intercepts, the log distance
weight, and every legislator and bill position, (3) refreshes the affinity
matrix, (4) updates each legislator's coefficient row, (5) updates the global
precision by a log-normal random walk, and (6) draws both intercept-variance
hyperparameters from their inverse-gamma conditionals.

By default (``cut_feedback=True``) position updates use the roll-call
conditional only, the literal reading of the six-step scheme; with
``cut_feedback=False`` their acceptance ratio also carries the
affinity-regression term so the chain targets the joint product exactly.
The joint target is known to reward collapsing the geometry (see
``ModelConfig``), hence the default. Proposal scales are tuned by a
Robbins-Monro recursion during burn-in (targets 0.44 for scalar blocks,
0.234 for row blocks) and frozen afterwards.

All randomness flows through two named substreams of the config seed:
``fit`` for proposals and conjugate draws, ``impute`` for vote imputation.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np
from scipy.special import expit, gammaln

from . import betareg, lsirm
from .betareg import RegressionState
from .config import ModelConfig
from .data import MISSING, CovariateMatrix, VoteMatrix
from .lsirm import LsirmState
from .rng import substream

BLOCKS = ("a", "b", "gamma", "z", "w", "beta", "phi")

TARGET_SCALAR = 0.44
TARGET_ROW = 0.234
_TARGETS = {
    "a": TARGET_SCALAR,
    "b": TARGET_SCALAR,
    "gamma": TARGET_SCALAR,
    "z": TARGET_ROW,
    "w": TARGET_ROW,
    "beta": TARGET_ROW,
    "phi": TARGET_SCALAR,
}
_ADAPT_C0 = 1.0
_ADAPT_DECAY = 0.6


@dataclass
class ProposalScales:
    """Random-walk step sizes per block. A zero scale freezes its block."""

    a: float = 0.5
    b: float = 0.5
    log_gamma: float = 0.2
    z: float = 0.3
    w: float = 0.3
    beta: float = 0.2
    log_phi: float = 0.3

    def __post_init__(self):
        for f in dataclasses.fields(self):
            if getattr(self, f.name) < 0:
                raise ValueError(f"proposal scale {f.name} must be nonnegative")

    @classmethod
    def from_config(cls, config: ModelConfig) -> "ProposalScales":
        return cls(
            a=config.step_a,
            b=config.step_b,
            log_gamma=config.step_log_gamma,
            z=config.step_z,
            w=config.step_w,
            beta=config.step_beta,
            log_phi=config.step_log_phi,
        )

    def copy(self) -> "ProposalScales":
        return dataclasses.replace(self)


@dataclass
class ChainOutput:
    """Thinned posterior draws plus run diagnostics.

    ``log_posterior`` is the joint log posterior of each stored draw
    evaluated on the observed cells only (no imputation terms), which makes
    it a deterministic function of the stored states. ``imputation_rng_seed``
    records the root seed whose ``impute`` substream drove vote imputation.
    """

    a: np.ndarray
    b: np.ndarray
    gamma: np.ndarray
    sigma2_a: np.ndarray
    sigma2_b: np.ndarray
    Z: np.ndarray
    W: np.ndarray
    B: np.ndarray
    phi: np.ndarray
    log_posterior: np.ndarray
    acceptance_rates: dict
    final_scales: ProposalScales
    config: ModelConfig
    imputation_rng_seed: int
    legislator_ids: tuple
    bill_ids: tuple
    covariate_names: tuple

    def __len__(self) -> int:
        return self.gamma.shape[0]

    @property
    def latent_dim(self) -> int:
        return self.Z.shape[2]

    def state_at(self, l: int) -> tuple[LsirmState, RegressionState]:
        ls = LsirmState(
            self.a[l].copy(), self.b[l].copy(), float(self.gamma[l]),
            self.Z[l].copy(), self.W[l].copy(),
            float(self.sigma2_a[l]), float(self.sigma2_b[l]),
        )
        reg = RegressionState(self.B[l].copy(), float(self.phi[l]))
        return ls, reg

    def map_index(self) -> int:
        if len(self) == 0:
            raise ValueError("no draws")
        return int(np.argmax(self.log_posterior))


def initial_states(
    votes: VoteMatrix, X: CovariateMatrix, config: ModelConfig
) -> tuple[LsirmState, RegressionState]:
    """Dispersed but finite starting point: intercepts at clamped logits of
    the marginal yea rates, positions standard normal."""
    rng = substream(config.seed, "init")
    row = np.nan_to_num(votes.yea_rates(axis=1), nan=0.5)
    col = np.nan_to_num(votes.yea_rates(axis=0), nan=0.5)
    a = np.log(np.clip(row, 0.05, 0.95) / (1.0 - np.clip(row, 0.05, 0.95)))
    b = np.log(np.clip(col, 0.05, 0.95) / (1.0 - np.clip(col, 0.05, 0.95)))
    S = config.latent_dim
    Z = rng.standard_normal((votes.n_legislators, S))
    W = rng.standard_normal((votes.n_bills, S))
    ls = LsirmState(a, b, 1.0, Z, W, 1.0, 1.0)
    reg = RegressionState(np.zeros((votes.n_legislators, X.n_covariates)), 10.0)
    return ls, reg


def impute_missing(
    state: LsirmState, votes: VoteMatrix, rng: np.random.Generator
) -> np.ndarray:
    """Bernoulli draws for every missing cell.

    Returns an int8 overlay of the vote matrix's shape holding 0/1 at missing
    cells and ``MISSING`` elsewhere; empty of content when nothing is missing.
    """
    overlay = np.full(votes.cells.shape, MISSING, dtype=np.int8)
    miss = ~votes.observed
    if miss.any():
        p = lsirm.vote_prob_matrix(state)
        overlay[miss] = (rng.random(int(miss.sum())) < p[miss]).astype(np.int8)
    return overlay


def joint_log_posterior(
    ls: LsirmState,
    reg: RegressionState,
    votes: VoteMatrix,
    X: CovariateMatrix,
    config: ModelConfig,
    imputed: np.ndarray | None = None,
) -> float:
    """Unnormalized joint log posterior of both blocks.

    The affinity-regression likelihood term is included whenever the config
    enables the regression layer; both priors always contribute. Raises if
    any component is non-finite, naming the component.
    """
    parts = {
        "roll-call likelihood": lsirm.loglik_votes(ls, votes, imputed),
        "latent-space prior": lsirm.logprior_lsirm(ls, config),
        "regression prior": betareg.logprior_regression(reg, X, config),
    }
    if config.include_regression:
        T = betareg.affinity(config.transform, lsirm.distance_matrix(ls.Z, ls.W))
        parts["affinity likelihood"] = betareg.loglik_beta(T, X, reg)
    total = 0.0
    for name, value in parts.items():
        if not np.isfinite(value):
            raise ValueError(f"non-finite log posterior: {name} = {value}")
        total += value
    return total


class _Workspace:
    """Mutable sampler state with cached likelihood matrices."""

    def __init__(self, votes, X, config, scales, ls, reg, rng_fit, rng_impute):
        self.votes = votes
        self.X = X
        self.config = config
        self.scales = scales
        self.rng = rng_fit
        self.rng_impute = rng_impute

        self.Y = votes.cells
        self.obs = votes.observed
        self.miss = ~self.obs
        self.any_missing = bool(self.miss.any())
        self.do_impute = config.impute and self.any_missing
        self.Xv = X.values
        self.Q = betareg.coefficient_prior_precision(X, config)
        # coefficient proposals are shaped like the design geometry: the
        # simplex-derived covariates are correlated, so an isotropic walk
        # would mix poorly along the correlated directions
        self.beta_prop = np.linalg.inv(np.linalg.cholesky(self.Q))
        self.beta_prop /= np.sqrt(np.trace(self.beta_prop.T @ self.beta_prop)
                                  / self.beta_prop.shape[0])

        self.a = ls.a.copy()
        self.b = ls.b.copy()
        self.gamma = float(ls.gamma)
        self.Z = ls.Z.copy()
        self.W = ls.W.copy()
        self.s2a = float(ls.sigma2_a)
        self.s2b = float(ls.sigma2_b)
        self.B = reg.B.copy()
        self.phi = float(reg.phi)

        self.N, self.P = self.Y.shape
        self.S = self.Z.shape[1]
        self.K = self.B.shape[1]

        self.accepted = {bk: 0 for bk in BLOCKS}
        self.proposed = {bk: 0 for bk in BLOCKS}

        self.D = lsirm.distance_matrix(self.Z, self.W)
        self.eta = self.a[:, None] + self.b[None, :] - self.gamma * self.D
        self._set_votes_used(np.full(self.Y.shape, MISSING, dtype=np.int8))
        self._refresh_affinity_full()
        self._refresh_mu_full()

    # ---- cache maintenance -------------------------------------------------

    def _set_votes_used(self, overlay):
        """Install an imputation overlay and rebuild the roll-call cache."""
        self.overlay = overlay
        cells = np.where(self.miss, overlay, self.Y)
        self.used = cells != MISSING
        self.Yf = np.where(self.used, cells, 0).astype(float)
        self.LLv = self._rollcall_cells(self.eta)

    def _rollcall_cells(self, eta):
        ll = self.Yf * eta - np.logaddexp(0.0, eta)
        return np.where(self.used, ll, 0.0)

    def _affinity_logs(self, D):
        T = betareg.clamp_affinity(betareg.affinity(self.config.transform, D))
        return np.log(T), np.log1p(-T)

    def _refresh_affinity_full(self):
        if self.config.include_regression:
            self.LT, self.L1T = self._affinity_logs(self.D)
        else:
            self.LT = self.L1T = None

    def _refresh_mu_full(self):
        if not self.config.include_regression:
            self.mu = self.CB = self.LLb = None
            return
        self.mu = betareg.mu_matrix(self.B, self.Xv)
        p = self.mu * self.phi
        q = (1.0 - self.mu) * self.phi
        self.CB = gammaln(self.phi) - gammaln(p) - gammaln(q)
        self.LLb = self.CB + (p - 1.0) * self.LT + (q - 1.0) * self.L1T

    # ---- audit helpers -----------------------------------------------------

    def _record(self, audit, block, index, value, log_u, delta, correction, ok):
        if audit is not None:
            audit.append({
                "kind": "proposal", "block": block, "index": index,
                "value": np.copy(value), "log_u": float(log_u),
                "delta": float(delta), "correction": float(correction),
                "accepted": bool(ok),
            })

    # ---- blocks ------------------------------------------------------------

    def _accept_rows(self, block, delta, audit, values):
        n = delta.shape[0]
        logu = np.log(self.rng.random(n))
        with np.errstate(invalid="ignore"):
            ok = logu < delta  # NaN compares false: non-finite ratios reject
        self.proposed[block] += n
        self.accepted[block] += int(ok.sum())
        if audit is not None:
            for i in range(n):
                self._record(audit, block, i, values[i], logu[i], delta[i], 0.0, ok[i])
        return ok

    def _update_a(self, audit):
        prop = self.a + self.scales.a * self.rng.standard_normal(self.N)
        eta_p = self.eta + (prop - self.a)[:, None]
        llv_p = self._rollcall_cells(eta_p)
        d_lik = llv_p.sum(axis=1) - self.LLv.sum(axis=1)
        d_pri = (self.a**2 - prop**2) / (2.0 * self.s2a)
        ok = self._accept_rows("a", d_lik + d_pri, audit, prop)
        if ok.any():
            self.a[ok] = prop[ok]
            self.eta[ok] = eta_p[ok]
            self.LLv[ok] = llv_p[ok]

    def _update_b(self, audit):
        prop = self.b + self.scales.b * self.rng.standard_normal(self.P)
        eta_p = self.eta + (prop - self.b)[None, :]
        llv_p = self._rollcall_cells(eta_p)
        d_lik = llv_p.sum(axis=0) - self.LLv.sum(axis=0)
        d_pri = (self.b**2 - prop**2) / (2.0 * self.s2b)
        ok = self._accept_rows("b", d_lik + d_pri, audit, prop)
        if ok.any():
            self.b[ok] = prop[ok]
            self.eta[:, ok] = eta_p[:, ok]
            self.LLv[:, ok] = llv_p[:, ok]

    def _update_gamma(self, audit):
        lg = np.log(self.gamma)
        lg_p = lg + self.scales.log_gamma * self.rng.standard_normal()
        # exp(log(x)) can differ from x in the last ulp; keep frozen blocks exact
        gamma_p = self.gamma if lg_p == lg else float(np.exp(lg_p))
        eta_p = self.eta + (self.gamma - gamma_p) * self.D
        llv_p = self._rollcall_cells(eta_p)
        d = llv_p.sum() - self.LLv.sum()
        d += ((lg - self.config.mu_gamma) ** 2 - (lg_p - self.config.mu_gamma) ** 2) \
            / (2.0 * self.config.sigma2_gamma)
        logu = np.log(self.rng.random())
        ok = bool(np.isfinite(d) and logu < d)
        self.proposed["gamma"] += 1
        self.accepted["gamma"] += ok
        self._record(audit, "gamma", None, gamma_p, logu, d, 0.0, ok)
        if ok:
            self.gamma = gamma_p
            self.eta = eta_p
            self.LLv = llv_p

    def _position_deltas(self, D_p, axis):
        """Roll-call and (unless cut) affinity log-lik deltas along rows or
        columns for a full proposed distance matrix."""
        eta_p = self.eta + self.gamma * (self.D - D_p)
        llv_p = self._rollcall_cells(eta_p)
        d = llv_p.sum(axis=axis) - self.LLv.sum(axis=axis)
        extras = (eta_p, llv_p)
        if self.config.include_regression:
            LT_p, L1T_p = self._affinity_logs(D_p)
            p = self.mu * self.phi
            q = (1.0 - self.mu) * self.phi
            llb_p = self.CB + (p - 1.0) * LT_p + (q - 1.0) * L1T_p
            if not self.config.cut_feedback:
                d = d + llb_p.sum(axis=axis) - self.LLb.sum(axis=axis)
            extras = (eta_p, llv_p, LT_p, L1T_p, llb_p)
        return d, extras

    def _update_z(self, audit):
        prop = self.Z + self.scales.z * self.rng.standard_normal((self.N, self.S))
        D_p = lsirm.distance_matrix(prop, self.W)
        d, extras = self._position_deltas(D_p, axis=1)
        d += 0.5 * (np.einsum("is,is->i", self.Z, self.Z)
                    - np.einsum("is,is->i", prop, prop))
        ok = self._accept_rows("z", d, audit, prop)
        if ok.any():
            eta_p, llv_p = extras[0], extras[1]
            self.Z[ok] = prop[ok]
            self.D[ok] = D_p[ok]
            self.eta[ok] = eta_p[ok]
            self.LLv[ok] = llv_p[ok]
            if self.config.include_regression:
                LT_p, L1T_p, llb_p = extras[2], extras[3], extras[4]
                self.LT[ok] = LT_p[ok]
                self.L1T[ok] = L1T_p[ok]
                self.LLb[ok] = llb_p[ok]

    def _update_w(self, audit):
        prop = self.W + self.scales.w * self.rng.standard_normal((self.P, self.S))
        D_p = lsirm.distance_matrix(self.Z, prop)
        d, extras = self._position_deltas(D_p, axis=0)
        d += 0.5 * (np.einsum("js,js->j", self.W, self.W)
                    - np.einsum("js,js->j", prop, prop))
        ok = self._accept_rows("w", d, audit, prop)
        if ok.any():
            eta_p, llv_p = extras[0], extras[1]
            self.W[ok] = prop[ok]
            self.D[:, ok] = D_p[:, ok]
            self.eta[:, ok] = eta_p[:, ok]
            self.LLv[:, ok] = llv_p[:, ok]
            if self.config.include_regression:
                LT_p, L1T_p, llb_p = extras[2], extras[3], extras[4]
                self.LT[:, ok] = LT_p[:, ok]
                self.L1T[:, ok] = L1T_p[:, ok]
                self.LLb[:, ok] = llb_p[:, ok]

    def _update_beta(self, audit):
        prop = self.B + self.scales.beta \
            * (self.rng.standard_normal((self.N, self.K)) @ self.beta_prop)
        quad = np.einsum("ik,kl,il->i", self.B, self.Q, self.B)
        quad_p = np.einsum("ik,kl,il->i", prop, self.Q, prop)
        d_pri = 0.5 * (quad - quad_p)
        if self.config.include_regression:
            mu_p = betareg.mu_matrix(prop, self.Xv)
            pp = mu_p * self.phi
            qp = (1.0 - mu_p) * self.phi
            cb_p = gammaln(self.phi) - gammaln(pp) - gammaln(qp)
            llb_p = cb_p + (pp - 1.0) * self.LT + (qp - 1.0) * self.L1T
            d = llb_p.sum(axis=1) - self.LLb.sum(axis=1) + d_pri
        else:
            d = d_pri
        ok = self._accept_rows("beta", d, audit, prop)
        if ok.any():
            self.B[ok] = prop[ok]
            if self.config.include_regression:
                self.mu[ok] = mu_p[ok]
                self.CB[ok] = cb_p[ok]
                self.LLb[ok] = llb_p[ok]

    def _update_phi(self, audit):
        lp = np.log(self.phi)
        lp_p = lp + self.scales.log_phi * self.rng.standard_normal()
        phi_p = self.phi if lp_p == lp else float(np.exp(lp_p))
        d = betareg.gamma_logpdf(phi_p, self.config.a_phi, self.config.b_phi) \
            - betareg.gamma_logpdf(self.phi, self.config.a_phi, self.config.b_phi)
        if self.config.include_regression:
            pp = self.mu * phi_p
            qp = (1.0 - self.mu) * phi_p
            cb_p = gammaln(phi_p) - gammaln(pp) - gammaln(qp)
            llb_p = cb_p + (pp - 1.0) * self.LT + (qp - 1.0) * self.L1T
            d += llb_p.sum() - self.LLb.sum()
        correction = lp_p - lp  # log-normal random walk is asymmetric in phi
        total = d + correction
        logu = np.log(self.rng.random())
        ok = bool(np.isfinite(total) and logu < total)
        self.proposed["phi"] += 1
        self.accepted["phi"] += ok
        self._record(audit, "phi", None, phi_p, logu, d, correction, ok)
        if ok:
            self.phi = phi_p
            if self.config.include_regression:
                self.CB = cb_p
                self.LLb = llb_p

    def _update_hyper(self, audit):
        shape_a = self.config.a_sigma + 0.5 * self.N
        rate_a = self.config.b_sigma + 0.5 * float(np.sum(self.a**2))
        self.s2a = rate_a / self.rng.gamma(shape_a)
        shape_b = self.config.a_sigma + 0.5 * self.P
        rate_b = self.config.b_sigma + 0.5 * float(np.sum(self.b**2))
        self.s2b = rate_b / self.rng.gamma(shape_b)
        if audit is not None:
            audit.append({"kind": "conjugate",
                          "sigma2_a": self.s2a, "sigma2_b": self.s2b})

    # ---- iteration ----------------------------------------------------------

    def iterate(self, audit=None):
        if self.do_impute:
            overlay = np.full(self.Y.shape, MISSING, dtype=np.int8)
            p = np.clip(expit(self.eta[self.miss]), lsirm._P_LO, lsirm._P_HI)
            overlay[self.miss] = (
                self.rng_impute.random(int(self.miss.sum())) < p
            ).astype(np.int8)
            self._set_votes_used(overlay)
            if audit is not None:
                audit.append({"kind": "impute", "overlay": overlay.copy()})
        self._update_a(audit)
        self._update_b(audit)
        self._update_gamma(audit)
        self._update_z(audit)
        self._update_w(audit)
        self._update_beta(audit)
        self._update_phi(audit)
        self._update_hyper(audit)

    def adapt(self, t, last_accepted, last_proposed):
        """Robbins-Monro step-size update from iteration ``t``'s rates."""
        rate = _ADAPT_C0 / t**_ADAPT_DECAY
        for block, attr in (("a", "a"), ("b", "b"), ("gamma", "log_gamma"),
                            ("z", "z"), ("w", "w"), ("beta", "beta"),
                            ("phi", "log_phi")):
            s = getattr(self.scales, attr)
            n = self.proposed[block] - last_proposed[block]
            if s == 0.0 or n == 0:
                continue
            acc = (self.accepted[block] - last_accepted[block]) / n
            s = float(np.clip(s * np.exp(rate * (acc - _TARGETS[block])), 1e-6, 50.0))
            setattr(self.scales, attr, s)

    # ---- views --------------------------------------------------------------

    def lsirm_state(self) -> LsirmState:
        return LsirmState(self.a.copy(), self.b.copy(), self.gamma,
                          self.Z.copy(), self.W.copy(), self.s2a, self.s2b)

    def regression_state(self) -> RegressionState:
        return RegressionState(self.B.copy(), self.phi)

    def log_posterior_observed(self) -> float:
        """Joint log posterior of the current state on observed cells only."""
        llv = float(np.sum(self.LLv, where=self.obs))
        lp = llv + lsirm.logprior_lsirm(self.lsirm_state(), self.config) \
            + betareg.logprior_regression(self.regression_state(), self.X, self.config)
        if self.config.include_regression:
            lp += float(self.LLb.sum())
        if not np.isfinite(lp):
            raise ValueError("non-finite log posterior at stored draw")
        return lp


def step(
    ls: LsirmState,
    reg: RegressionState,
    votes: VoteMatrix,
    X: CovariateMatrix,
    config: ModelConfig,
    scales: ProposalScales,
    rng: np.random.Generator,
    rng_impute: np.random.Generator | None = None,
    audit: list | None = None,
) -> tuple[LsirmState, RegressionState, dict]:
    """Run exactly one full sampler iteration and return the new states.

    ``audit``, when a list, receives a record per imputation, proposal, and
    conjugate draw so that a logged short chain can be replayed against the
    joint posterior. ``rng_impute`` defaults to ``rng``.
    """
    ws = _Workspace(votes, X, config, scales, ls, reg,
                    rng, rng if rng_impute is None else rng_impute)
    ws.iterate(audit)
    diagnostics = {
        "accepted": dict(ws.accepted),
        "proposed": dict(ws.proposed),
        "log_posterior": ws.log_posterior_observed(),
        "overlay": ws.overlay if ws.do_impute else None,
    }
    return ws.lsirm_state(), ws.regression_state(), diagnostics


def run(
    votes: VoteMatrix,
    X: CovariateMatrix,
    config: ModelConfig,
    scales: ProposalScales | None = None,
    init: tuple[LsirmState, RegressionState] | None = None,
) -> ChainOutput:
    """Run the full chain: burn-in with adaptation, then thinned storage.

    Fully deterministic given the config (seed included). Bill ids of ``X``
    must already match the vote matrix (see ``validate_covariates``).
    """
    if X.bill_ids != votes.bill_ids:
        raise ValueError("covariate bill order does not match votes; "
                         "run validate_covariates first")
    scales = (scales or ProposalScales.from_config(config)).copy()
    ls, reg = init if init is not None else initial_states(votes, X, config)
    rng_fit = substream(config.seed, "fit")
    rng_impute = substream(config.seed, "impute")
    ws = _Workspace(votes, X, config, scales, ls, reg, rng_fit, rng_impute)

    L = config.n_draws()
    N, P, S, K = ws.N, ws.P, ws.S, ws.K
    out = {
        "a": np.empty((L, N)), "b": np.empty((L, P)), "gamma": np.empty(L),
        "sigma2_a": np.empty(L), "sigma2_b": np.empty(L),
        "Z": np.empty((L, N, S)), "W": np.empty((L, P, S)),
        "B": np.empty((L, N, K)), "phi": np.empty(L),
        "log_posterior": np.empty(L),
    }
    post_start_acc = dict(ws.accepted)
    post_start_prop = dict(ws.proposed)

    stored = 0
    for t in range(1, config.iterations + 1):
        last_acc = dict(ws.accepted)
        last_prop = dict(ws.proposed)
        try:
            ws.iterate()
            if t <= config.burn_in:
                ws.adapt(t, last_acc, last_prop)
                if t == config.burn_in:
                    post_start_acc = dict(ws.accepted)
                    post_start_prop = dict(ws.proposed)
            elif (t - config.burn_in) % config.thinning == 0:
                out["a"][stored] = ws.a
                out["b"][stored] = ws.b
                out["gamma"][stored] = ws.gamma
                out["sigma2_a"][stored] = ws.s2a
                out["sigma2_b"][stored] = ws.s2b
                out["Z"][stored] = ws.Z
                out["W"][stored] = ws.W
                out["B"][stored] = ws.B
                out["phi"][stored] = ws.phi
                out["log_posterior"][stored] = ws.log_posterior_observed()
                stored += 1
        except Exception as exc:
            raise RuntimeError(f"sampler failed at iteration {t}: {exc}") from exc
    assert stored == L

    rates = {}
    for bk in BLOCKS:
        prop = ws.proposed[bk] - post_start_prop[bk]
        acc = ws.accepted[bk] - post_start_acc[bk]
        if prop == 0:  # burn-in-only run: report rates over the whole run
            prop, acc = ws.proposed[bk], ws.accepted[bk]
        rates[bk] = acc / prop if prop else 0.0

    return ChainOutput(
        acceptance_rates=rates,
        final_scales=ws.scales.copy(),
        config=config,
        imputation_rng_seed=config.seed,
        legislator_ids=votes.legislator_ids,
        bill_ids=votes.bill_ids,
        covariate_names=X.column_names,
        **out,
    )
