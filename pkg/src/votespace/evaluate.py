"""Dimension-selection criteria and posterior predictive validation.

Information criteria are computed from the roll-call likelihood only (the
affinity layer is conditioned on the same latent geometry, so the latent
dimension is selected on the vote model). Predictive checks replicate vote
matrices from the Bernoulli layer and affinity matrices from the beta layer,
and report interval coverage and two-sided predictive p-values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd
from scipy.special import gammaln

from . import betareg, lsirm
from .config import ModelConfig
from .data import CovariateMatrix, PartyRoster, VoteMatrix
from .rng import keyed_substream, substream
from .sampler import ChainOutput

# ---------------------------------------------------------------------------
# information criteria
# ---------------------------------------------------------------------------


@dataclass
class CriteriaRow:
    latent_dim: int
    bic: float
    dic: float
    waic: float
    max_loglik: float
    mean_loglik: float
    loglik_at_mean: float
    p_d: float
    p_waic: float
    lppd: float
    param_count: int
    n_obs: int


@dataclass
class CriteriaReport:
    rows: list = field(default_factory=list)

    def add(self, row: CriteriaRow) -> None:
        self.rows.append(row)

    def merged(self, other: "CriteriaReport") -> "CriteriaReport":
        return CriteriaReport(self.rows + other.rows)

    def by_dim(self, latent_dim: int) -> CriteriaRow:
        for row in self.rows:
            if row.latent_dim == latent_dim:
                return row
        raise KeyError(latent_dim)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([vars(r) for r in self.rows])


def default_param_count(n_legislators: int, n_bills: int, latent_dim: int) -> int:
    """Free-parameter count used by BIC: intercepts, distance weight, latent
    coordinates, and the two intercept-variance hyperparameters."""
    return (
        n_legislators + n_bills + 1
        + latent_dim * (n_legislators + n_bills) + 2
    )


def _aligned_position_means(chain: ChainOutput) -> tuple[np.ndarray, np.ndarray]:
    """Posterior-mean positions after rigid alignment of every draw.

    Averaging raw draws would mix arbitrarily rotated configurations, so the
    chain is aligned first (no-op when it already is).
    """
    from .postprocess import AlignedChain, procrustes_align

    aligned = chain if isinstance(chain, AlignedChain) else procrustes_align(chain)
    return aligned.Z.mean(axis=0), aligned.W.mean(axis=0)


def information_criteria(
    chain: ChainOutput, votes: VoteMatrix, config: ModelConfig | None = None
) -> CriteriaReport:
    """BIC, DIC, and WAIC of the fitted vote model.

    BIC uses the best (maximum over draws) total log-likelihood with the
    documented parameter count and the number of observed cells, both
    overridable through the config. DIC evaluates the deviance at the
    posterior-mean parameters (positions averaged after alignment) with
    p_D = 2 (loglik(mean) - mean loglik). WAIC uses the cell-wise
    log-pointwise predictive density and its variance-based penalty; at
    least two draws are required.
    """
    config = config or chain.config
    L = len(chain)
    if L == 0:
        raise ValueError("no draws")
    if L < 2:
        raise ValueError("WAIC needs at least 2 draws")
    obs = votes.observed
    n_obs = int(obs.sum())
    cells = votes.cells

    lse = np.full(n_obs, -np.inf)          # running logsumexp per cell
    mean_cell = np.zeros(n_obs)            # Welford running mean
    m2_cell = np.zeros(n_obs)              # Welford running sum of squares
    totals = np.empty(L)
    for l in range(L):
        ls, _ = chain.state_at(l)
        eta = lsirm.linear_predictor(ls)
        ll = lsirm.bernoulli_cell_loglik(eta, cells)[obs]
        totals[l] = ll.sum()
        lse = np.logaddexp(lse, ll)
        delta = ll - mean_cell
        mean_cell += delta / (l + 1)
        m2_cell += delta * (ll - mean_cell)

    lppd = float(np.sum(lse - np.log(L)))
    p_waic = float(np.sum(m2_cell / (L - 1)))
    waic = -2.0 * (lppd - p_waic)

    Z_mean, W_mean = _aligned_position_means(chain)
    mean_state = lsirm.LsirmState(
        chain.a.mean(axis=0), chain.b.mean(axis=0), float(chain.gamma.mean()),
        Z_mean, W_mean,
        float(chain.sigma2_a.mean()), float(chain.sigma2_b.mean()),
    )
    ll_at_mean = lsirm.loglik_votes(mean_state, votes)
    mean_ll = float(totals.mean())
    p_d = 2.0 * (ll_at_mean - mean_ll)
    dic = -2.0 * ll_at_mean + 2.0 * p_d

    k = config.criteria_param_count
    if k is None:
        k = default_param_count(votes.n_legislators, votes.n_bills, chain.latent_dim)
    n_for_bic = config.criteria_n_obs if config.criteria_n_obs is not None else n_obs
    bic = -2.0 * float(totals.max()) + k * np.log(n_for_bic)

    report = CriteriaReport()
    report.add(CriteriaRow(
        latent_dim=chain.latent_dim, bic=float(bic), dic=float(dic),
        waic=float(waic), max_loglik=float(totals.max()), mean_loglik=mean_ll,
        loglik_at_mean=float(ll_at_mean), p_d=float(p_d), p_waic=p_waic,
        lppd=lppd, param_count=int(k), n_obs=int(n_for_bic),
    ))
    return report


# ---------------------------------------------------------------------------
# posterior predictive checks
# ---------------------------------------------------------------------------


def _select_draws(n_draws: int, max_draws: int) -> np.ndarray:
    if n_draws <= max_draws:
        return np.arange(n_draws)
    return np.unique(np.linspace(0, n_draws - 1, max_draws).round().astype(int))


@dataclass
class LsirmPpcReport:
    bill_ids: tuple
    bill_observed: np.ndarray
    bill_lower: np.ndarray
    bill_upper: np.ndarray
    bill_coverage: float
    legislator_ids: tuple
    legislator_observed: np.ndarray
    legislator_lower: np.ndarray
    legislator_upper: np.ndarray
    legislator_coverage: float
    bill_replicates: np.ndarray          # (R, P) pooled replicate rates
    legislator_replicates: np.ndarray    # (R, N)
    draw_indices: tuple
    level: float


def ppc_lsirm(
    chain: ChainOutput,
    votes: VoteMatrix,
    n_rep: int = 100,
    rng: np.random.Generator | None = None,
    max_draws: int = 20,
    level: float = 0.95,
) -> LsirmPpcReport:
    """Replicate vote matrices and check approval-rate interval coverage.

    ``n_rep`` replicates are generated per selected draw (draws evenly
    spaced along the chain); approval rates are computed over the observed
    cells only, at both the bill and the legislator level.
    """
    if len(chain) == 0:
        raise ValueError("no draws")
    if n_rep < 1:
        raise ValueError("no replicates")
    rng = rng or substream(chain.config.seed, "ppc")
    obs = votes.observed
    bill_counts = obs.sum(axis=0).astype(float)
    leg_counts = obs.sum(axis=1).astype(float)
    if (bill_counts == 0).any() or (leg_counts == 0).any():
        raise ValueError("every bill and legislator needs at least one observed vote")

    idx = _select_draws(len(chain), max_draws)
    bill_rates = np.empty((len(idx) * n_rep, votes.n_bills))
    leg_rates = np.empty((len(idx) * n_rep, votes.n_legislators))
    for pos, l in enumerate(idx):
        ls, _ = chain.state_at(int(l))
        p = lsirm.vote_prob_matrix(ls)
        draws = rng.random((n_rep, *p.shape)) < p
        draws &= obs
        sl = slice(pos * n_rep, (pos + 1) * n_rep)
        bill_rates[sl] = draws.sum(axis=1) / bill_counts
        leg_rates[sl] = draws.sum(axis=2) / leg_counts

    alpha = (1.0 - level) / 2.0
    b_lo, b_hi = np.quantile(bill_rates, [alpha, 1.0 - alpha], axis=0)
    l_lo, l_hi = np.quantile(leg_rates, [alpha, 1.0 - alpha], axis=0)
    bill_obs = votes.yea_rates(axis=0)
    leg_obs = votes.yea_rates(axis=1)
    return LsirmPpcReport(
        bill_ids=votes.bill_ids,
        bill_observed=bill_obs, bill_lower=b_lo, bill_upper=b_hi,
        bill_coverage=float(np.mean((bill_obs >= b_lo) & (bill_obs <= b_hi))),
        legislator_ids=votes.legislator_ids,
        legislator_observed=leg_obs, legislator_lower=l_lo, legislator_upper=l_hi,
        legislator_coverage=float(np.mean((leg_obs >= l_lo) & (leg_obs <= l_hi))),
        bill_replicates=bill_rates, legislator_replicates=leg_rates,
        draw_indices=tuple(int(i) for i in idx), level=level,
    )


def _tail_counts(rep: np.ndarray, obs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-column counts of replicates >= and <= the observed value.

    Ties enter both tails, which keeps the doubled two-sided p-value
    conservative. Both counts depend only on order, so any strictly
    increasing transform applied to replicates and observations together
    leaves them unchanged.
    """
    return (rep >= obs).sum(axis=0), (rep <= obs).sum(axis=0)


@dataclass
class BetaPpcReport:
    legislator_ids: tuple
    legislator_observed: np.ndarray       # mean over draws of each t_i.
    per_legislator_coverage: np.ndarray   # share of draws covering t_i.
    legislator_coverage: float
    ppp: np.ndarray
    global_observed: np.ndarray           # t_.. per selected draw
    global_replicates: np.ndarray
    draw_indices: tuple
    level: float


def ppc_beta(
    chain: ChainOutput,
    X: CovariateMatrix,
    n_rep: int = 100,
    rng: np.random.Generator | None = None,
    max_draws: int = 20,
    level: float = 0.95,
) -> BetaPpcReport:
    """Internal check of the affinity regression.

    Conditional on each selected draw's positions, the transformed distances
    are the reference affinities; replicates come from the fitted beta law of
    that draw. Per-legislator mean affinities are compared replicate-vs-
    reference, including two-sided predictive p-values (ties counted in both
    tails, capped at 1).
    """
    if len(chain) == 0:
        raise ValueError("no draws")
    if n_rep < 1:
        raise ValueError("no replicates")
    rng = rng or substream(chain.config.seed, "ppc")
    transform = chain.config.transform
    idx = _select_draws(len(chain), max_draws)
    N = chain.Z.shape[1]

    obs_mean = np.zeros(N)
    covered = np.zeros(N)
    ge = np.zeros(N)
    le = np.zeros(N)
    glob_obs = np.empty(len(idx))
    glob_rep = np.empty(len(idx) * n_rep)
    alpha = (1.0 - level) / 2.0
    for pos, l in enumerate(idx):
        ls, reg = chain.state_at(int(l))
        T_obs = betareg.clamp_affinity(
            betareg.affinity(transform, lsirm.distance_matrix(ls.Z, ls.W))
        )
        t_i = T_obs.mean(axis=1)
        obs_mean += t_i
        glob_obs[pos] = T_obs.mean()

        mu = betareg.mu_matrix(reg.B, X.values)
        t_rep = rng.beta(mu * reg.phi, (1.0 - mu) * reg.phi, size=(n_rep, *mu.shape))
        rep_i = t_rep.mean(axis=2)                      # (n_rep, N)
        lo, hi = np.quantile(rep_i, [alpha, 1.0 - alpha], axis=0)
        covered += (t_i >= lo) & (t_i <= hi)
        ge_l, le_l = _tail_counts(rep_i, t_i)
        ge += ge_l
        le += le_l
        glob_rep[pos * n_rep:(pos + 1) * n_rep] = t_rep.mean(axis=(1, 2))

    n_total = len(idx) * n_rep
    ppp = np.minimum(1.0, 2.0 * np.minimum(ge / n_total, le / n_total))
    per_leg = covered / len(idx)
    return BetaPpcReport(
        legislator_ids=chain.legislator_ids,
        legislator_observed=obs_mean / len(idx),
        per_legislator_coverage=per_leg,
        legislator_coverage=float(per_leg.mean()),
        ppp=ppp,
        global_observed=glob_obs,
        global_replicates=glob_rep,
        draw_indices=tuple(int(i) for i in idx),
        level=level,
    )


# ---------------------------------------------------------------------------
# affinity-transform robustness
# ---------------------------------------------------------------------------


@dataclass
class RobustnessReport:
    correlations: pd.DataFrame          # covariate x transform pair
    contrasts: pd.DataFrame             # designated-pair mean difference
    coefficient_means: dict             # transform -> (N, K) posterior means
    transforms: tuple


def _beta_cell_loglik(mu, phi, LT, L1T):
    p, q = mu * phi, (1.0 - mu) * phi
    return gammaln(phi) - gammaln(p) - gammaln(q) + (p - 1.0) * LT + (q - 1.0) * L1T


def _refit_regression(
    chain: ChainOutput,
    X: CovariateMatrix,
    config: ModelConfig,
    transform: str,
    rng: np.random.Generator,
    sweeps: int,
    max_draws: int,
) -> np.ndarray:
    """Posterior-mean coefficients under one transform, conditional on the
    stored position draws (regression layer re-run, positions fixed).

    A short cut-style chain: each stored draw's affinity matrix serves as the
    data for a few coefficient/precision sweeps; the first quarter of the
    draws warms the step sizes and is excluded from the average.
    """
    Xv = X.values
    N, K = chain.B.shape[1], chain.B.shape[2]
    Q = betareg.coefficient_prior_precision(X, config)
    prop_shape = np.linalg.inv(np.linalg.cholesky(Q))
    prop_shape /= np.sqrt(np.trace(prop_shape.T @ prop_shape) / K)
    B = np.zeros((N, K))
    phi = 10.0
    step_beta = config.step_beta
    step_phi = config.step_log_phi

    idx = _select_draws(len(chain), max_draws)
    warm = max(1, len(idx) // 4)
    total = np.zeros((N, K))
    kept = 0
    for pos, l in enumerate(idx):
        D = lsirm.distance_matrix(chain.Z[int(l)], chain.W[int(l)])
        T = betareg.clamp_affinity(betareg.affinity(transform, D))
        LT, L1T = np.log(T), np.log1p(-T)
        for sweep in range(sweeps):
            mu = betareg.mu_matrix(B, Xv)
            llb = _beta_cell_loglik(mu, phi, LT, L1T)
            prop = B + step_beta * (rng.standard_normal((N, K)) @ prop_shape)
            mu_p = betareg.mu_matrix(prop, Xv)
            llb_p = _beta_cell_loglik(mu_p, phi, LT, L1T)
            d = llb_p.sum(axis=1) - llb.sum(axis=1)
            d += 0.5 * (np.einsum("ik,kl,il->i", B, Q, B)
                        - np.einsum("ik,kl,il->i", prop, Q, prop))
            ok = np.log(rng.random(N)) < d
            B[ok] = prop[ok]
            if pos < warm:
                rate = 1.0 / (pos * sweeps + sweep + 1) ** 0.5
                step_beta = float(np.clip(
                    step_beta * np.exp(rate * (ok.mean() - 0.234)), 1e-4, 10.0))

            mu = betareg.mu_matrix(B, Xv)
            lphi = np.log(phi)
            lphi_p = lphi + step_phi * rng.standard_normal()
            phi_p = float(np.exp(lphi_p))
            d_phi = _beta_cell_loglik(mu, phi_p, LT, L1T).sum() \
                - _beta_cell_loglik(mu, phi, LT, L1T).sum()
            d_phi += betareg.gamma_logpdf(phi_p, config.a_phi, config.b_phi) \
                - betareg.gamma_logpdf(phi, config.a_phi, config.b_phi)
            d_phi += lphi_p - lphi
            if np.log(rng.random()) < d_phi:
                phi = phi_p
            if pos >= warm:
                total += B
                kept += 1
    return total / kept


def _correlation_frame(coef: dict, ordered: list, names) -> pd.DataFrame:
    rows = []
    for ai in range(len(ordered)):
        for bi in range(ai + 1, len(ordered)):
            ta, tb = ordered[ai], ordered[bi]
            for k, cov in enumerate(names):
                x, y = coef[ta][:, k], coef[tb][:, k]
                if np.array_equal(x, y) and np.std(x) > 0.0:
                    rho = 1.0
                elif np.std(x) == 0.0 or np.std(y) == 0.0:
                    rho = 1.0 if np.allclose(x, y) else np.nan
                else:
                    rho = float(np.corrcoef(x, y)[0, 1])
                rows.append((cov, ta, tb, rho))
    return pd.DataFrame(
        rows, columns=["covariate", "transform_a", "transform_b", "correlation"]
    )


def affinity_robustness(
    chain: ChainOutput,
    X: CovariateMatrix,
    transforms: list,
    config: ModelConfig | None = None,
    roster: PartyRoster | None = None,
    pair: tuple | None = None,
    sweeps: int = 2,
    max_draws: int = 400,
    mode: str = "conditional",
    votes: VoteMatrix | None = None,
) -> RobustnessReport:
    """Coefficient agreement across affinity transforms.

    ``mode="conditional"`` (default) re-runs only the regression layer on the
    stored position draws; ``mode="refit"`` re-runs the full sampler per
    transform and needs ``votes``. Reports the across-legislator Pearson
    correlation of posterior-mean coefficients per covariate and transform
    pair (identical transforms correlate at exactly 1; a constant coefficient
    map yields NaN), plus designated-pair mean contrasts when a roster is
    given.
    """
    if len(transforms) < 2:
        raise ValueError("need >= 2 transforms")
    if len(chain) == 0:
        raise ValueError("no draws")
    config = config or chain.config
    names = chain.covariate_names

    coef = {}
    for transform in transforms:
        transform = str(betareg.AffinityTransform(transform).value)
        if transform in coef:
            continue
        if mode == "conditional":
            rng = keyed_substream(config.seed, "robustness", transform)
            coef[transform] = _refit_regression(
                chain, X, config, transform, rng, sweeps, max_draws)
        elif mode == "refit":
            if votes is None:
                raise ValueError("mode='refit' needs the vote matrix")
            from .sampler import run

            refit = run(votes, X, config.replace(transform=transform))
            coef[transform] = refit.B.mean(axis=0)
        else:
            raise ValueError(f"unknown robustness mode {mode!r}")

    # pairs are formed over the list as passed, so a repeated transform
    # yields a self-pair (correlation exactly 1)
    ordered = [str(betareg.AffinityTransform(t).value) for t in transforms]
    correlations = _correlation_frame(coef, ordered, names)

    contrast_rows = []
    if roster is not None:
        from .postprocess import _designated_pair

        if pair is None:
            pair = _designated_pair(roster, chain.legislator_ids)
        members = {
            p: [i for i, leg in enumerate(chain.legislator_ids)
                if roster.label(leg) == p]
            for p in pair
        }
        for t in dict.fromkeys(ordered):
            for k, cov in enumerate(names):
                diff = float(coef[t][members[pair[0]], k].mean()
                             - coef[t][members[pair[1]], k].mean())
                contrast_rows.append((t, cov, diff))
    contrasts = pd.DataFrame(
        contrast_rows, columns=["transform", "covariate", "pair_diff"]
    )
    return RobustnessReport(correlations, contrasts, coef,
                            tuple(dict.fromkeys(ordered)))


# ---------------------------------------------------------------------------
# report files
# ---------------------------------------------------------------------------


def write_criteria(report: CriteriaReport, path: str | Path) -> None:
    report.to_frame().to_csv(path, index=False, na_rep="NA")


def _density_frame(observed: np.ndarray, replicates: np.ndarray,
                   cap: int = 20_000) -> pd.DataFrame:
    reps = np.asarray(replicates).ravel()
    if reps.size > cap:
        stride = int(np.ceil(reps.size / cap))
        reps = reps[::stride]
    return pd.DataFrame({
        "kind": ["observed"] * np.asarray(observed).size + ["replicate"] * reps.size,
        "value": np.concatenate([np.asarray(observed).ravel(), reps]),
    })


def write_ppc(
    lsirm_report: LsirmPpcReport, beta_report: BetaPpcReport, outdir: str | Path
) -> list:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []

    bills = pd.DataFrame({
        "bill": lsirm_report.bill_ids,
        "observed": lsirm_report.bill_observed,
        "lower": lsirm_report.bill_lower,
        "upper": lsirm_report.bill_upper,
        "covered": ((lsirm_report.bill_observed >= lsirm_report.bill_lower)
                    & (lsirm_report.bill_observed <= lsirm_report.bill_upper)),
    })
    legs = pd.DataFrame({
        "legislator": lsirm_report.legislator_ids,
        "observed": lsirm_report.legislator_observed,
        "lower": lsirm_report.legislator_lower,
        "upper": lsirm_report.legislator_upper,
        "covered": ((lsirm_report.legislator_observed >= lsirm_report.legislator_lower)
                    & (lsirm_report.legislator_observed <= lsirm_report.legislator_upper)),
    })
    beta = pd.DataFrame({
        "legislator": beta_report.legislator_ids,
        "observed_mean_affinity": beta_report.legislator_observed,
        "coverage": beta_report.per_legislator_coverage,
        "ppp": beta_report.ppp,
    })
    summary = pd.DataFrame({
        "statistic": ["bill_coverage", "legislator_coverage",
                      "affinity_coverage", "ppp_median", "ppp_mean"],
        "value": [lsirm_report.bill_coverage, lsirm_report.legislator_coverage,
                  beta_report.legislator_coverage,
                  float(np.median(beta_report.ppp)),
                  float(np.mean(beta_report.ppp))],
    })
    frames = {
        "ppc_bills.csv": bills,
        "ppc_legislators.csv": legs,
        "ppc_affinity.csv": beta,
        "ppc_summary.csv": summary,
        "density_bill_rates.csv": _density_frame(
            lsirm_report.bill_observed, lsirm_report.bill_replicates),
        "density_legislator_rates.csv": _density_frame(
            lsirm_report.legislator_observed, lsirm_report.legislator_replicates),
        "density_global_affinity.csv": _density_frame(
            beta_report.global_observed, beta_report.global_replicates),
    }
    for name, frame in frames.items():
        path = outdir / name
        frame.to_csv(path, index=False, na_rep="NA")
        written.append(path)
    return written


def write_robustness(report: RobustnessReport, outdir: str | Path) -> list:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    path = outdir / "transform_correlations.csv"
    report.correlations.to_csv(path, index=False, na_rep="NA")
    written.append(path)
    if not report.contrasts.empty:
        path = outdir / "transform_contrasts.csv"
        report.contrasts.to_csv(path, index=False, na_rep="NA")
        written.append(path)
    return written
