import pytest
from hypothesis import settings

from votespace import sampler, synthetic
from votespace.config import ModelConfig

settings.register_profile("deterministic", derandomize=True)
settings.load_profile("deterministic")


@pytest.fixture(scope="session")
def desk_instance():
    """Default desk-scale synthetic instance (N=40, P=120, S=2, K=4)."""
    spec = synthetic.SyntheticSpec(seed=1234)
    votes, cov, roster, truth = synthetic.generate(spec)
    return spec, votes, cov, roster, truth


@pytest.fixture(scope="session")
def desk_chain(desk_instance):
    """One real fit of the desk-scale instance, shared by the acceptance
    criteria that examine the same posterior."""
    _, votes, cov, _, _ = desk_instance
    config = ModelConfig(iterations=12_000, burn_in=4_000, thinning=16, seed=7)
    return sampler.run(votes, cov, config)
