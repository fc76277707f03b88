"""Named random substreams derived from a single root seed.

Every source of randomness in the package (fitting, imputation, posterior
predictive simulation, synthetic data generation) pulls its generator from
here, so partial re-runs of a pipeline stay reproducible.
"""

from __future__ import annotations

import zlib

import numpy as np

# Fixed stream indices; appending new names is fine, renumbering is not.
STREAMS = {
    "fit": 0,
    "impute": 1,
    "ppc": 2,
    "simulate": 3,
    "init": 4,
    "robustness": 5,
}


def substream(seed: int, name: str) -> np.random.Generator:
    """Return the generator for the named substream of ``seed``."""
    try:
        key = STREAMS[name]
    except KeyError:
        raise ValueError(f"unknown rng stream {name!r}") from None
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(key,)))


def keyed_substream(seed: int, name: str, key: str) -> np.random.Generator:
    """Substream further keyed by an arbitrary string (e.g. a transform name)."""
    base = STREAMS[name]
    tag = zlib.crc32(key.encode("utf-8"))
    return np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(base, tag))
    )
