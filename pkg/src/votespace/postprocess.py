"""Identifiability alignment and substantive posterior summaries.

The likelihood depends on latent positions only through distances, so draws
are identified up to rigid motions. Alignment maps each draw's stacked
legislator+bill configuration onto the highest-log-posterior draw by
centering and an orthogonal (rotation or reflection) transform, preserving
every pairwise distance. Summaries then turn aligned coefficient draws into
party-level polarization and cohesion tables and ordered per-covariate
exports.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd
from scipy.linalg import orthogonal_procrustes

from .data import PartyRoster
from .sampler import ChainOutput


@dataclass
class AlignedChain(ChainOutput):
    """Chain with all position draws mapped onto a common reference draw."""

    reference_index: int = 0


def procrustes_align(chain: ChainOutput) -> AlignedChain:
    """Center and rotate every draw's stacked (Z; W) onto the best draw.

    One common transform per draw is applied to both legislator and bill
    positions, so distances are untouched. A draw with a degenerate (all
    coincident) configuration is centered but otherwise left alone.
    """
    if len(chain) == 0:
        raise ValueError("no draws")
    ref_idx = chain.map_index()
    N = chain.Z.shape[1]

    ref = np.concatenate([chain.Z[ref_idx], chain.W[ref_idx]], axis=0)
    ref = ref - ref.mean(axis=0)

    Z_out = np.empty_like(chain.Z)
    W_out = np.empty_like(chain.W)
    for l in range(len(chain)):
        C = np.concatenate([chain.Z[l], chain.W[l]], axis=0)
        C = C - C.mean(axis=0)
        norm = np.linalg.norm(C)
        if norm == 0.0:
            warnings.warn(f"draw {l}: degenerate configuration, identity transform")
            R = np.eye(C.shape[1])
        else:
            R, _ = orthogonal_procrustes(C, ref)
        aligned = C @ R
        Z_out[l] = aligned[:N]
        W_out[l] = aligned[N:]

    return AlignedChain(
        a=chain.a, b=chain.b, gamma=chain.gamma,
        sigma2_a=chain.sigma2_a, sigma2_b=chain.sigma2_b,
        Z=Z_out, W=W_out, B=chain.B, phi=chain.phi,
        log_posterior=chain.log_posterior,
        acceptance_rates=chain.acceptance_rates,
        final_scales=chain.final_scales,
        config=chain.config,
        imputation_rng_seed=chain.imputation_rng_seed,
        legislator_ids=chain.legislator_ids,
        bill_ids=chain.bill_ids,
        covariate_names=chain.covariate_names,
        reference_index=ref_idx,
    )


@dataclass
class IssueSummary:
    """Posterior coefficient summaries at three levels.

    ``legislators``: one row per (legislator, covariate) with the posterior
    mean and equal-tailed credible bounds. ``parties``: per-(party,
    covariate) mean and sd of the legislators' posterior means (NaN marks
    undefined values for empty or single-member parties). ``covariates``:
    per-covariate mean difference between the designated party pair and the
    across-legislator sd of posterior means.
    """

    legislators: pd.DataFrame
    parties: pd.DataFrame
    covariates: pd.DataFrame
    cred_level: float
    pair: tuple


def _designated_pair(roster: PartyRoster, legislator_ids) -> tuple:
    sizes = {}
    for leg in legislator_ids:
        party = roster.label(leg)
        sizes[party] = sizes.get(party, 0) + 1
    ranked = sorted(sizes, key=lambda p: (-sizes[p], p))
    if len(ranked) < 2:
        raise ValueError("need at least two parties to designate a pair")
    return ranked[0], ranked[1]


def coefficient_summaries(
    chain: ChainOutput,
    roster: PartyRoster,
    cred_level: float = 0.95,
    pair: tuple | None = None,
) -> IssueSummary:
    """Summarize coefficient draws by legislator, party, and covariate.

    ``pair`` designates the two parties whose mean difference measures
    polarization; the default is the two largest parties by membership
    (ties broken by name). Standard deviations use ddof=1.
    """
    if len(chain) == 0:
        raise ValueError("no draws")
    legislator_ids = chain.legislator_ids
    for leg in legislator_ids:
        if leg not in roster.assignments:
            raise ValueError(f"legislator {leg!r} has no party label")
    if pair is None:
        pair = _designated_pair(roster, legislator_ids)
    for party in pair:
        if party not in roster.parties:
            raise ValueError(f"designated party {party!r} not in roster")

    names = chain.covariate_names
    lo_q = (1.0 - cred_level) / 2.0
    means = chain.B.mean(axis=0)                      # (N, K)
    lower = np.quantile(chain.B, lo_q, axis=0)
    upper = np.quantile(chain.B, 1.0 - lo_q, axis=0)

    rows = []
    for i, leg in enumerate(legislator_ids):
        party = roster.label(leg)
        for k, cov in enumerate(names):
            rows.append((leg, party, cov, means[i, k], lower[i, k], upper[i, k]))
    legislators = pd.DataFrame(
        rows, columns=["legislator", "party", "covariate", "mean", "lower", "upper"]
    )

    party_labels = sorted(roster.parties)
    party_rows = []
    members_of = {
        p: [i for i, leg in enumerate(legislator_ids) if roster.label(leg) == p]
        for p in party_labels
    }
    for party in party_labels:
        idx = members_of[party]
        for k, cov in enumerate(names):
            if not idx:
                party_rows.append((party, cov, 0, np.nan, np.nan))
                continue
            vals = means[idx, k]
            sd = float(np.std(vals, ddof=1)) if len(idx) > 1 else np.nan
            party_rows.append((party, cov, len(idx), float(vals.mean()), sd))
    parties = pd.DataFrame(
        party_rows, columns=["party", "covariate", "n", "mean", "sd"]
    )

    cov_rows = []
    for k, cov in enumerate(names):
        first = means[members_of.get(pair[0], []), k]
        second = means[members_of.get(pair[1], []), k]
        diff = (
            float(first.mean() - second.mean())
            if len(first) and len(second) else np.nan
        )
        between = float(np.std(means[:, k], ddof=1)) if means.shape[0] > 1 else np.nan
        cov_rows.append((cov, diff, between))
    covariates = pd.DataFrame(
        cov_rows, columns=["covariate", "pair_diff", "between_sd"]
    )
    return IssueSummary(legislators, parties, covariates, cred_level, tuple(pair))


def ordered_coefficient_export(summary: IssueSummary, covariate: str) -> pd.DataFrame:
    """Rows of one covariate sorted by posterior mean (ids break ties)."""
    sub = summary.legislators[summary.legislators["covariate"] == covariate]
    if sub.empty:
        raise ValueError(f"unknown covariate {covariate!r}")
    out = sub.sort_values(["mean", "legislator"], kind="mergesort")
    return out.reset_index(drop=True)[["legislator", "party", "mean", "lower", "upper"]]


def write_summaries(summary: IssueSummary, outdir: str | Path) -> list:
    """Write the three summary tables plus one ordered export per covariate.

    Returns the written paths.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, frame in (
        ("legislator_coefficients.csv", summary.legislators),
        ("party_summaries.csv", summary.parties),
        ("covariate_summaries.csv", summary.covariates),
    ):
        path = outdir / name
        frame.to_csv(path, index=False, na_rep="NA")
        written.append(path)
    spectra = outdir / "spectra"
    spectra.mkdir(exist_ok=True)
    for cov in summary.legislators["covariate"].unique():
        safe = "".join(c if c.isalnum() or c in "-_" else "_" for c in cov)
        path = spectra / f"{safe}.csv"
        ordered_coefficient_export(summary, cov).to_csv(path, index=False, na_rep="NA")
        written.append(path)
    return written
