"""Model configuration: prior hyperparameters, chain lengths, sampler knobs.

A config can be round-tripped through a plain ``key = value`` text file so
that runs are fully described by one small artifact; every field can also be
overridden from the command line (see :mod:`votespace.cli`).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

AFFINITY_TRANSFORMS = ("exp_neg_d", "exp_neg_d_squared", "inverse_one_plus_d")


@dataclass
class ModelConfig:
    """Everything a fit needs besides the data itself.

    ``g = None`` means the coefficient prior scale defaults to the number of
    bills at fit time (unit-information scaling). ``burn_in == iterations``
    is allowed and yields an empty chain.
    """

    # model structure
    latent_dim: int = 2
    transform: str = "exp_neg_d"

    # priors
    a_sigma: float = 1.0          # inverse-gamma shape for both variance params
    b_sigma: float = 1.0          # inverse-gamma scale for both variance params
    mu_gamma: float = 0.5         # normal prior mean of log(distance weight)
    sigma2_gamma: float = 1.0     # normal prior variance of log(distance weight)
    g: float | None = None        # coefficient prior scale; None -> n_bills
    diffuse_coefficients: bool = False   # use N(0, sigma2_coefficient I) instead
    sigma2_coefficient: float = 100.0
    a_phi: float = 1.0            # gamma shape for the precision parameter
    b_phi: float = 0.1            # gamma rate for the precision parameter

    # chain
    iterations: int = 55_000
    burn_in: int = 5_000
    thinning: int = 10
    seed: int = 1

    # sampler behaviour
    impute: bool = True           # draw missing votes each iteration
    include_regression: bool = True   # fit the affinity regression layer
    # Position updates use the roll-call conditional by default: letting the
    # affinity-density term feed back into the geometry rewards collapsing
    # all distances (its log grows like N*P/2 * log(phi)), which empirically
    # destroys the latent space. cut_feedback=False targets the literal
    # joint product instead.
    cut_feedback: bool = True

    # initial random-walk step sizes (adapted during burn-in)
    step_a: float = 0.5
    step_b: float = 0.5
    step_log_gamma: float = 0.2
    step_z: float = 0.3
    step_w: float = 0.3
    step_beta: float = 0.2
    step_log_phi: float = 0.3

    # information-criteria overrides (None -> documented defaults)
    criteria_param_count: int | None = None
    criteria_n_obs: int | None = None

    def __post_init__(self) -> None:
        if self.latent_dim < 1:
            raise ValueError("latent_dim must be >= 1")
        if self.transform not in AFFINITY_TRANSFORMS:
            raise ValueError(
                f"unknown transform {self.transform!r}; choose from {AFFINITY_TRANSFORMS}"
            )
        for name in ("a_sigma", "b_sigma", "sigma2_gamma", "sigma2_coefficient",
                     "a_phi", "b_phi"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.g is not None and self.g <= 0:
            raise ValueError("g must be positive when given")
        if self.iterations < 0 or self.burn_in < 0:
            raise ValueError("iterations and burn_in must be nonnegative")
        if self.burn_in > self.iterations:
            raise ValueError("burn_in must not exceed iterations")
        if self.thinning < 1:
            raise ValueError("thinning must be >= 1")
        if (self.iterations - self.burn_in) % self.thinning != 0:
            raise ValueError("thinning must divide iterations - burn_in exactly")
        for name in ("step_a", "step_b", "step_log_gamma", "step_z", "step_w",
                     "step_beta", "step_log_phi"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")

    def n_draws(self) -> int:
        return (self.iterations - self.burn_in) // self.thinning

    def replace(self, **changes) -> "ModelConfig":
        return dataclasses.replace(self, **changes)


def _parse_value(field: dataclasses.Field, raw: str):
    raw = raw.strip()
    ftype = field.type
    if ftype == "bool":
        low = raw.lower()
        if low in ("true", "yes", "1"):
            return True
        if low in ("false", "no", "0"):
            return False
        raise ValueError(f"cannot parse boolean from {raw!r}")
    if ftype == "int":
        return int(raw)
    if ftype == "float":
        return float(raw)
    if ftype in ("float | None", "int | None"):
        if raw.lower() in ("none", ""):
            return None
        return float(raw) if ftype.startswith("float") else int(raw)
    return raw


def load_config(path: str | Path) -> ModelConfig:
    """Read a ``key = value`` config file; unknown keys are an error."""
    fields = {f.name: f for f in dataclasses.fields(ModelConfig)}
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, raw = stripped.split("=", 1)
        key = key.strip()
        if key not in fields:
            raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
        values[key] = _parse_value(fields[key], raw)
    return ModelConfig(**values)


def dump_config(config: ModelConfig) -> str:
    """Serialize a config in the same format :func:`load_config` reads."""
    lines = []
    for f in dataclasses.fields(ModelConfig):
        value = getattr(config, f.name)
        lines.append(f"{f.name} = {'none' if value is None else value}")
    return "\n".join(lines) + "\n"


def save_config(config: ModelConfig, path: str | Path) -> None:
    Path(path).write_text(dump_config(config))
