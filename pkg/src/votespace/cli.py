"""Command-line pipeline: simulate, fit, select-dim, summarize, ppc, robustness.

Every ModelConfig field is exposed as a flag of the same name (underscores
become hyphens) and overrides the ``--config`` file. Output directories are
never clobbered without ``--overwrite``. Exit status is 0 only when every
requested report was written.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from . import chainio, evaluate, postprocess, sampler, synthetic
from .config import ModelConfig, load_config
from .data import (
    filter_lopsided,
    load_covariates,
    load_parties,
    load_votes,
    validate_covariates,
    write_parties,
    write_votes,
)
from .rng import substream


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("model configuration overrides")
    for f in dataclasses.fields(ModelConfig):
        flag = "--" + f.name.replace("_", "-")
        if f.type == "bool":
            group.add_argument(flag, dest=f.name, default=None,
                               action=argparse.BooleanOptionalAction)
        elif f.type == "int":
            group.add_argument(flag, dest=f.name, default=None, type=int)
        elif f.type == "float":
            group.add_argument(flag, dest=f.name, default=None, type=float)
        elif f.type in ("float | None", "int | None"):
            cast = float if f.type.startswith("float") else int
            group.add_argument(
                flag, dest=f.name, default=None,
                type=lambda s, cast=cast: None if s.lower() == "none" else cast(s),
            )
        else:
            group.add_argument(flag, dest=f.name, default=None, type=str)


def _resolve_config(args: argparse.Namespace) -> ModelConfig:
    config = load_config(args.config) if args.config else ModelConfig()
    overrides = {
        f.name: getattr(args, f.name)
        for f in dataclasses.fields(ModelConfig)
        if getattr(args, f.name, None) is not None
    }
    return config.replace(**overrides) if overrides else config


def _prepare_outdir(path: str, overwrite: bool) -> Path:
    out = Path(path)
    if out.exists() and any(out.iterdir()) and not overwrite:
        raise FileExistsError(f"{out} exists and is not empty; pass --overwrite")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_inputs(args, need_parties=False):
    votes = load_votes(args.votes)
    if getattr(args, "filter_lopsided", False):
        votes, removed = filter_lopsided(votes, args.lopsided_lo, args.lopsided_hi)
    else:
        removed = ()
    cov = validate_covariates(load_covariates(args.covariates), votes)
    roster = None
    if getattr(args, "parties", None):
        roster = load_parties(args.parties)
        roster.check_covers(votes)
    elif need_parties:
        raise ValueError("--parties is required for this command")
    return votes, cov, roster, removed


def _write_removed(outdir: Path, removed) -> None:
    if removed:
        (outdir / "removed_bills.csv").write_text(
            "bill\n" + "\n".join(removed) + "\n")


def cmd_simulate(args) -> int:
    out = _prepare_outdir(args.out, args.overwrite)
    spec = synthetic.SyntheticSpec(
        n_legislators=args.n_legislators,
        n_bills=args.n_bills,
        latent_dim=args.latent_dim if args.latent_dim else 2,
        gamma=args.true_gamma,
        missing_rate=args.missing_rate,
        seed=args.seed if args.seed is not None else 1234,
    )
    votes, cov, roster, truth = synthetic.generate(spec)
    write_votes(votes, out / "votes.csv")
    from .data import write_covariates

    write_covariates(cov, out / "covariates.csv")
    write_parties(roster, out / "parties.csv")
    synthetic.write_truth(truth, out / "truth.csv")
    print(f"wrote synthetic bundle to {out}")
    return 0


def cmd_fit(args) -> int:
    config = _resolve_config(args)
    out = _prepare_outdir(args.out, args.overwrite)
    votes, cov, roster, removed = _load_inputs(args)
    chain = sampler.run(votes, cov, config)
    inputs = {"votes": args.votes, "covariates": args.covariates}
    if getattr(args, "parties", None):
        inputs["parties"] = args.parties
    chainio.save_chain(chain, out, input_paths=inputs, overwrite=True)
    _write_removed(out, removed)
    lines = ["block,acceptance_rate"]
    for bk in sampler.BLOCKS:
        lines.append(f"{bk},{chain.acceptance_rates[bk]!r}")
    (out / "acceptance.csv").write_text("\n".join(lines) + "\n")
    print(f"stored {len(chain)} draws in {out}")
    return 0


def cmd_select_dim(args) -> int:
    config = _resolve_config(args)
    out = _prepare_outdir(args.out, args.overwrite)
    dims = args.dims
    votes, cov, _, removed = _load_inputs(args)
    report = evaluate.CriteriaReport()
    for S in dims:
        sub = config.replace(latent_dim=S)
        chain = sampler.run(votes, cov, sub)
        chainio.save_chain(chain, out / f"dim_{S}",
                           input_paths={"votes": args.votes,
                                        "covariates": args.covariates},
                           overwrite=True)
        report = report.merged(evaluate.information_criteria(chain, votes, sub))
        row = report.by_dim(S)
        print(f"S={S}: BIC={row.bic:.1f} DIC={row.dic:.1f} WAIC={row.waic:.1f}")
    evaluate.write_criteria(report, out / "criteria.csv")
    _write_removed(out, removed)
    return 0


def cmd_summarize(args) -> int:
    out = _prepare_outdir(args.out, args.overwrite)
    chain = chainio.load_chain(args.chain)
    roster = load_parties(args.parties)
    aligned = postprocess.procrustes_align(chain)
    pair = tuple(args.pair.split(",")) if args.pair else None
    summary = postprocess.coefficient_summaries(
        aligned, roster, cred_level=args.cred_level, pair=pair)
    written = postprocess.write_summaries(summary, out)
    print(f"wrote {len(written)} summary files to {out} "
          f"(pair {summary.pair[0]} vs {summary.pair[1]})")
    return 0


def cmd_ppc(args) -> int:
    out = _prepare_outdir(args.out, args.overwrite)
    chain = chainio.load_chain(args.chain)
    votes = load_votes(args.votes)
    votes = _restrict_votes(votes, chain)
    cov = validate_covariates(load_covariates(args.covariates), votes)
    seed = args.seed if args.seed is not None else chain.config.seed
    rng = substream(seed, "ppc")
    lsirm_rep = evaluate.ppc_lsirm(chain, votes, n_rep=args.replicates,
                                   rng=rng, max_draws=args.max_draws)
    beta_rep = evaluate.ppc_beta(chain, cov, n_rep=args.replicates,
                                 rng=rng, max_draws=args.max_draws)
    written = evaluate.write_ppc(lsirm_rep, beta_rep, out)
    print(f"wrote {len(written)} predictive-check files to {out}; "
          f"bill coverage {lsirm_rep.bill_coverage:.3f}, "
          f"legislator coverage {lsirm_rep.legislator_coverage:.3f}")
    return 0


def cmd_robustness(args) -> int:
    transforms = args.transforms.split(",") if args.transforms else []
    if len(transforms) < 2:
        raise ValueError("need >= 2 transforms (comma-separated)")
    out = _prepare_outdir(args.out, args.overwrite)
    chain = chainio.load_chain(args.chain)
    votes = load_votes(args.votes) if args.votes else None
    if votes is not None:
        votes = _restrict_votes(votes, chain)
    ref = votes
    cov_source = load_covariates(args.covariates)
    if ref is None:
        order = [cov_source.bill_ids.index(b) for b in chain.bill_ids]
        from .data import CovariateMatrix

        cov = CovariateMatrix(
            cov_source.values[order], cov_source.column_names, chain.bill_ids,
            intercept_column=cov_source.intercept_column,
            simplex_columns=cov_source.simplex_columns,
        )
    else:
        cov = validate_covariates(cov_source, ref)
    roster = load_parties(args.parties) if args.parties else None
    pair = tuple(args.pair.split(",")) if args.pair else None
    report = evaluate.affinity_robustness(
        chain, cov, transforms, roster=roster, pair=pair,
        mode="refit" if args.full_refit else "conditional", votes=votes,
    )
    written = evaluate.write_robustness(report, out)
    print(f"wrote {len(written)} robustness files to {out}")
    return 0


def _restrict_votes(votes, chain):
    """Drop bills that the fitted chain never saw (e.g. lopsided-filtered)."""
    if votes.bill_ids == chain.bill_ids:
        return votes
    keep = [votes.bill_ids.index(b) for b in chain.bill_ids]
    from .data import VoteMatrix

    return VoteMatrix(votes.cells[:, keep], votes.legislator_ids, chain.bill_ids)


def _dims_list(raw: str) -> list:
    try:
        dims = [int(tok) for tok in raw.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"malformed dimension list {raw!r}")
    if not dims or any(d < 1 for d in dims):
        raise argparse.ArgumentTypeError(f"malformed dimension list {raw!r}")
    return dims


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="votespace",
        description="Latent-space scaling of roll-call votes with an "
                    "issue-covariate affinity regression.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, votes=True, covariates=True, chain=False, parties=False):
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--overwrite", action="store_true")
        if votes:
            p.add_argument("--votes", required=True)
        if covariates:
            p.add_argument("--covariates", required=True)
        if chain:
            p.add_argument("--chain", required=True, help="fit output directory")
        p.add_argument("--parties", required=parties, default=None)

    p = sub.add_parser("simulate", help="write a synthetic data bundle")
    p.add_argument("--out", required=True)
    p.add_argument("--overwrite", action="store_true")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--n-legislators", type=int, default=40)
    p.add_argument("--n-bills", type=int, default=120)
    p.add_argument("--latent-dim", type=int, default=2)
    p.add_argument("--true-gamma", type=float, default=1.5)
    p.add_argument("--missing-rate", type=float, default=0.05)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="run the one-stage sampler")
    common(p)
    p.add_argument("--config", default=None, help="key = value config file")
    p.add_argument("--filter-lopsided", action="store_true",
                   help="drop bills with extreme yea rates before fitting")
    p.add_argument("--lopsided-lo", type=float, default=0.025)
    p.add_argument("--lopsided-hi", type=float, default=0.975)
    _add_config_flags(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("select-dim", help="fit a range of latent dimensions")
    common(p)
    p.add_argument("--config", default=None)
    p.add_argument("--dims", required=True, type=_dims_list,
                   help="comma-separated latent dimensions, e.g. 1,2,3")
    p.add_argument("--filter-lopsided", action="store_true")
    p.add_argument("--lopsided-lo", type=float, default=0.025)
    p.add_argument("--lopsided-hi", type=float, default=0.975)
    _add_config_flags(p)
    p.set_defaults(func=cmd_select_dim)

    p = sub.add_parser("summarize", help="align draws and export summaries")
    common(p, votes=False, covariates=False, chain=True, parties=True)
    p.add_argument("--pair", default=None,
                   help="two party labels, comma-separated, for the "
                        "polarization contrast")
    p.add_argument("--cred-level", type=float, default=0.95)
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("ppc", help="posterior predictive checks")
    common(p, chain=True)
    p.add_argument("--replicates", type=int, default=100,
                   help="replicates per selected draw")
    p.add_argument("--max-draws", type=int, default=20)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_ppc)

    p = sub.add_parser("robustness", help="coefficient stability across "
                                          "affinity transforms")
    common(p, votes=False, chain=True)
    p.add_argument("--votes", default=None,
                   help="needed only with --full-refit")
    p.add_argument("--transforms", required=True,
                   help="comma-separated transform names")
    p.add_argument("--pair", default=None)
    p.add_argument("--full-refit", action="store_true")
    p.set_defaults(func=cmd_robustness)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, FileExistsError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
