import numpy as np
import pytest

from votespace import chainio, sampler, synthetic
from votespace.config import ModelConfig


@pytest.fixture(scope="module")
def small_fit():
    spec = synthetic.SyntheticSpec(n_legislators=8, n_bills=10, seed=3)
    votes, cov, roster, _ = synthetic.generate(spec)
    config = ModelConfig(iterations=80, burn_in=20, thinning=5, seed=9)
    chain = sampler.run(votes, cov, config)
    return votes, cov, chain


class TestSaveLoad:
    def test_round_trip(self, small_fit, tmp_path):
        votes, cov, chain = small_fit
        out = tmp_path / "run"
        chainio.save_chain(chain, out)
        loaded = chainio.load_chain(out)
        assert len(loaded) == len(chain)
        for name in ("a", "b", "gamma", "Z", "W", "B", "phi",
                     "sigma2_a", "sigma2_b", "log_posterior"):
            np.testing.assert_array_equal(getattr(chain, name),
                                          getattr(loaded, name))
        assert loaded.legislator_ids == chain.legislator_ids
        assert loaded.bill_ids == chain.bill_ids
        assert loaded.covariate_names == chain.covariate_names
        assert loaded.config == chain.config
        assert loaded.acceptance_rates == chain.acceptance_rates

    def test_refuses_overwrite(self, small_fit, tmp_path):
        _, _, chain = small_fit
        out = tmp_path / "run"
        chainio.save_chain(chain, out)
        with pytest.raises(FileExistsError):
            chainio.save_chain(chain, out)
        chainio.save_chain(chain, out, overwrite=True)

    def test_manifest_digests(self, small_fit, tmp_path):
        votes, cov, chain = small_fit
        data = tmp_path / "votes.csv"
        data.write_text("id,b1\nl1,1\nl2,0\n")
        out = tmp_path / "run"
        chainio.save_chain(chain, out, input_paths={"votes": data})
        manifest = chainio.load_manifest(out / "manifest.txt")
        assert manifest["digest.votes"] == chainio.file_digest(data)
        assert "created_utc" in manifest

    def test_chain_files_byte_identical_across_saves(self, small_fit, tmp_path):
        _, _, chain = small_fit
        a = tmp_path / "a"
        b = tmp_path / "b"
        chainio.save_chain(chain, a)
        chainio.save_chain(chain, b)
        for name in chainio.CHAIN_FILES:
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_missing_directory(self, tmp_path):
        with pytest.raises(FileNotFoundError, match="manifest"):
            chainio.load_chain(tmp_path / "nope")

    def test_empty_chain_loads_as_error(self, small_fit, tmp_path):
        votes, cov, chain = small_fit
        config = ModelConfig(iterations=20, burn_in=20, thinning=1, seed=9)
        empty = sampler.run(votes, cov, config)
        out = tmp_path / "empty"
        chainio.save_chain(empty, out)
        with pytest.raises(ValueError, match="no draws"):
            chainio.load_chain(out)
