"""Joint Bayesian latent-space scaling of roll-call votes with an
issue-covariate affinity regression, fitted by a one-stage MCMC sampler."""

__version__ = "0.1.0"

from .betareg import (  # noqa: F401
    AffinityTransform,
    RegressionState,
    affinity,
    beta_logpdf_mean_precision,
    loglik_beta,
    loglik_beta_grad,
    logprior_regression,
    mu_of,
)
from .config import ModelConfig, load_config, save_config  # noqa: F401
from .data import (  # noqa: F401
    CovariateMatrix,
    PartyRoster,
    VoteCoding,
    VoteMatrix,
    effective_parties,
    filter_lopsided,
    load_covariates,
    load_parties,
    load_votes,
    validate_covariates,
    write_votes,
)
from .evaluate import (  # noqa: F401
    affinity_robustness,
    information_criteria,
    ppc_beta,
    ppc_lsirm,
)
from .lsirm import (  # noqa: F401
    LsirmState,
    distance,
    loglik_votes,
    logprior_lsirm,
    vote_prob,
)
from .postprocess import (  # noqa: F401
    coefficient_summaries,
    ordered_coefficient_export,
    procrustes_align,
)
from .sampler import (  # noqa: F401
    ChainOutput,
    ProposalScales,
    impute_missing,
    joint_log_posterior,
    run,
    step,
)
from .synthetic import SyntheticSpec, generate, oracle_log_posterior  # noqa: F401
