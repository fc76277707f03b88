"""Chain persistence: one delimited file per parameter block plus a manifest.

Floats are written with 17 significant digits, which round-trips doubles
exactly, so identical runs produce byte-identical chain files. The manifest
is key-value text carrying the resolved config, seed, input digests,
timestamps, and acceptance diagnostics; it is the only file with run-time
metadata.
"""

from __future__ import annotations

import dataclasses
import hashlib
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .config import ModelConfig, dump_config
from .sampler import BLOCKS, ChainOutput, ProposalScales

_FMT = "%.17g"

CHAIN_FILES = ("a.csv", "b.csv", "gamma.csv", "sigma2.csv", "z.csv", "w.csv",
               "beta.csv", "phi.csv", "log_posterior.csv")


def file_digest(path: str | Path) -> str:
    h = hashlib.sha256()
    h.update(Path(path).read_bytes())
    return h.hexdigest()


def _write_block(path: Path, header: list, data: np.ndarray) -> None:
    data = np.asarray(data, dtype=float)
    if data.ndim == 1:
        data = data.reshape(-1, 1)
    if data.shape[0] == 0:
        path.write_text(",".join(header) + "\n")
        return
    np.savetxt(path, data, fmt=_FMT, delimiter=",",
               header=",".join(header), comments="")


def save_chain(
    chain: ChainOutput,
    outdir: str | Path,
    input_paths: dict | None = None,
    overwrite: bool = False,
) -> list:
    """Write all chain files and the manifest into ``outdir``."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    existing = [f for f in CHAIN_FILES if (outdir / f).exists()]
    if existing and not overwrite:
        raise FileExistsError(
            f"{outdir} already holds chain files (e.g. {existing[0]}); "
            "pass overwrite to replace them"
        )

    legs = chain.legislator_ids
    bills = chain.bill_ids
    covs = chain.covariate_names
    S = chain.latent_dim
    L = len(chain)

    z_header = [f"{leg}:{s}" for leg in legs for s in range(S)]
    w_header = [f"{bill}:{s}" for bill in bills for s in range(S)]
    beta_header = [f"{leg}:{cov}" for leg in legs for cov in covs]

    written = []
    blocks = [
        ("a.csv", list(legs), chain.a),
        ("b.csv", list(bills), chain.b),
        ("gamma.csv", ["gamma"], chain.gamma.reshape(L, 1)),
        ("sigma2.csv", ["sigma2_a", "sigma2_b"],
         np.column_stack([chain.sigma2_a, chain.sigma2_b]) if L else
         np.empty((0, 2))),
        ("z.csv", z_header, chain.Z.reshape(L, len(z_header))),
        ("w.csv", w_header, chain.W.reshape(L, len(w_header))),
        ("beta.csv", beta_header, chain.B.reshape(L, len(beta_header))),
        ("phi.csv", ["phi"], chain.phi.reshape(L, 1)),
        ("log_posterior.csv", ["log_posterior"], chain.log_posterior.reshape(L, 1)),
    ]
    for name, header, data in blocks:
        path = outdir / name
        _write_block(path, header, data)
        written.append(path)

    manifest = {
        "package_version": __version__,
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "n_draws": L,
        "n_legislators": len(legs),
        "n_bills": len(bills),
        "n_covariates": len(covs),
        "latent_dim": S,
        "imputation_rng_seed": chain.imputation_rng_seed,
    }
    for bk in BLOCKS:
        manifest[f"acceptance_rate.{bk}"] = repr(chain.acceptance_rates[bk])
    for f in dataclasses.fields(ProposalScales):
        manifest[f"final_scale.{f.name}"] = repr(getattr(chain.final_scales, f.name))
    for label, path in (input_paths or {}).items():
        manifest[f"digest.{label}"] = file_digest(path)
        manifest[f"input.{label}"] = str(path)
    manifest["output_files"] = ";".join(f.name for f in written)

    lines = [f"{k} = {v}" for k, v in manifest.items()]
    lines.append("")
    lines.append("# resolved config")
    lines.append(dump_config(chain.config).rstrip())
    (outdir / "manifest.txt").write_text("\n".join(lines) + "\n")
    written.append(outdir / "manifest.txt")
    return written


def _read_block(path: Path) -> tuple[list, np.ndarray]:
    with path.open() as fh:
        header = fh.readline().rstrip("\n").split(",")
        rest = fh.read()
    if not rest.strip():
        return header, np.empty((0, len(header)))
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2, dtype=float)
    return header, data


def load_manifest(path: str | Path) -> dict:
    values = {}
    for line in Path(path).read_text().splitlines():
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        key, _, raw = stripped.partition("=")
        values[key.strip()] = raw.strip()
    return values


def load_chain(rundir: str | Path) -> ChainOutput:
    """Rebuild a ChainOutput from a run directory written by save_chain."""
    rundir = Path(rundir)
    manifest_path = rundir / "manifest.txt"
    if not manifest_path.exists():
        raise FileNotFoundError(f"{rundir}: no manifest.txt (not a run directory?)")
    manifest = load_manifest(manifest_path)

    config_keys = {f.name for f in dataclasses.fields(ModelConfig)}
    config_values = {}
    for key, raw in manifest.items():
        if key in config_keys:
            field = next(f for f in dataclasses.fields(ModelConfig) if f.name == key)
            from .config import _parse_value

            config_values[key] = _parse_value(field, raw)
    config = ModelConfig(**config_values)

    leg_ids, a = _read_block(rundir / "a.csv")
    bill_ids, b = _read_block(rundir / "b.csv")
    _, gamma = _read_block(rundir / "gamma.csv")
    _, sigma2 = _read_block(rundir / "sigma2.csv")
    z_header, Z = _read_block(rundir / "z.csv")
    _, W = _read_block(rundir / "w.csv")
    beta_header, B = _read_block(rundir / "beta.csv")
    _, phi = _read_block(rundir / "phi.csv")
    _, logpost = _read_block(rundir / "log_posterior.csv")

    L = a.shape[0]
    if L == 0:
        raise ValueError(f"{rundir}: no draws")
    N = len(leg_ids)
    P = len(bill_ids)
    S = int(manifest["latent_dim"])
    # beta header entries are "<legislator>:<covariate>", legislator-major
    prefix = len(leg_ids[0]) + 1
    covs = tuple(name[prefix:] for name in beta_header[: len(beta_header) // N])

    rates = {bk: float(manifest[f"acceptance_rate.{bk}"]) for bk in BLOCKS}
    scales = ProposalScales(**{
        f.name: float(manifest[f"final_scale.{f.name}"])
        for f in dataclasses.fields(ProposalScales)
    })
    return ChainOutput(
        a=a, b=b, gamma=gamma[:, 0],
        sigma2_a=sigma2[:, 0], sigma2_b=sigma2[:, 1],
        Z=Z.reshape(L, N, S), W=W.reshape(L, P, S),
        B=B.reshape(L, N, len(covs)), phi=phi[:, 0],
        log_posterior=logpost[:, 0],
        acceptance_rates=rates,
        final_scales=scales,
        config=config,
        imputation_rng_seed=int(manifest["imputation_rng_seed"]),
        legislator_ids=tuple(leg_ids),
        bill_ids=tuple(bill_ids),
        covariate_names=covs,
    )
