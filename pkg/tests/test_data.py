import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from votespace.data import (
    MISSING,
    PLENARY_CODING,
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


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestLoadVotes:
    def test_basic(self, tmp_path):
        path = write(tmp_path, "v.csv", "id,b1,b2\nl1,1,0\nl2,NA,1\n")
        votes = load_votes(path)
        assert votes.n_legislators == 2 and votes.n_bills == 2
        assert votes.cells[0, 0] == 1 and votes.cells[0, 1] == 0
        assert votes.cells[1, 0] == MISSING
        assert int((votes.cells == MISSING).sum()) == 1

    def test_category_tokens(self, tmp_path):
        path = write(tmp_path, "v.csv",
                     "id,b1,b2,b3\nl1,Yea,Nay,Abstention\nl2,Yea,Yea,NA\n")
        votes = load_votes(path, coding=PLENARY_CODING)
        assert votes.cells[0].tolist() == [1, 0, 0]
        assert votes.cells[1].tolist() == [1, 1, MISSING]

    def test_empty_file(self, tmp_path):
        path = write(tmp_path, "v.csv", "")
        with pytest.raises(ValueError, match="no rows"):
            load_votes(path)

    def test_header_only(self, tmp_path):
        path = write(tmp_path, "v.csv", "id,b1\n")
        with pytest.raises(ValueError, match="no rows"):
            load_votes(path)

    def test_unknown_token_names_cell(self, tmp_path):
        path = write(tmp_path, "v.csv", "id,b1,b2\nl1,1,2\n")
        with pytest.raises(ValueError) as err:
            load_votes(path)
        assert "l1" in str(err.value) and "b2" in str(err.value)

    def test_ragged_row(self, tmp_path):
        path = write(tmp_path, "v.csv", "id,b1,b2\nl1,1\n")
        with pytest.raises(ValueError, match="row 2"):
            load_votes(path)

    def test_all_missing_column_rejected(self, tmp_path):
        path = write(tmp_path, "v.csv", "id,b1,b2\nl1,1,NA\nl2,0,NA\n")
        with pytest.raises(ValueError, match="b2"):
            load_votes(path)

    def test_all_missing_row_rejected(self, tmp_path):
        path = write(tmp_path, "v.csv", "id,b1,b2\nl1,1,0\nl2,NA,NA\n")
        with pytest.raises(ValueError, match="l2"):
            load_votes(path)

    def test_round_trip_bit_exact(self, tmp_path):
        path = write(tmp_path, "v.csv", "id,b1,b2,b3\nl1,1,NA,0\nl2,0,1,NA\n")
        votes = load_votes(path)
        out = tmp_path / "out.csv"
        write_votes(votes, out)
        again = load_votes(out)
        assert np.array_equal(votes.cells, again.cells)
        assert votes.legislator_ids == again.legislator_ids
        assert votes.bill_ids == again.bill_ids
        # serialize once more: identical bytes
        out2 = tmp_path / "out2.csv"
        write_votes(again, out2)
        assert out.read_bytes() == out2.read_bytes()

    def test_coding_overlap_rejected(self):
        with pytest.raises(ValueError, match="twice"):
            VoteCoding(yea={"1"}, not_yea={"1"}, missing={"NA"})


class TestVoteMatrix:
    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="shape"):
            VoteMatrix(np.zeros((2, 2), dtype=np.int8), ("a",), ("b1", "b2"))

    def test_invalid_state(self):
        cells = np.array([[1, 3]], dtype=np.int8)
        with pytest.raises(ValueError, match="invalid cell state"):
            VoteMatrix(cells, ("a",), ("b1", "b2"))

    def test_cells_frozen(self):
        votes = VoteMatrix(np.array([[1, 0]], dtype=np.int8), ("a",), ("b1", "b2"))
        with pytest.raises(ValueError):
            votes.cells[0, 0] = 0

    def test_yea_rates_ignore_missing(self):
        cells = np.array([[1, MISSING], [1, 0], [0, 1]], dtype=np.int8)
        votes = VoteMatrix(cells, ("a", "b", "c"), ("b1", "b2"))
        assert votes.yea_rates(axis=0).tolist() == [2 / 3, 0.5]


class TestFilterLopsided:
    def _votes(self, yeas_per_bill, voters=100):
        cells = np.zeros((voters, len(yeas_per_bill)), dtype=np.int8)
        for j, k in enumerate(yeas_per_bill):
            cells[:k, j] = 1
        ids = tuple(f"l{i}" for i in range(voters))
        return VoteMatrix(cells, ids, tuple(f"b{j}" for j in range(len(yeas_per_bill))))

    def test_lopsided_bill_removed(self):
        votes = self._votes([99, 50])
        kept, removed = filter_lopsided(votes, 0.025, 0.975)
        assert removed == ("b0",)
        assert kept.bill_ids == ("b1",)

    def test_interior_bill_retained(self):
        votes = self._votes([50])
        kept, removed = filter_lopsided(votes, 0.025, 0.975)
        assert removed == () and kept.bill_ids == ("b0",)

    def test_vacuous_bounds_identity(self):
        votes = self._votes([99, 1, 50])
        kept, removed = filter_lopsided(votes, 0.0, 1.0)
        assert removed == ()
        assert np.array_equal(kept.cells, votes.cells)

    def test_all_removed(self):
        votes = self._votes([100, 0])
        with pytest.raises(ValueError, match="empty agenda"):
            filter_lopsided(votes, 0.025, 0.975)

    def test_idempotent(self):
        votes = self._votes([99, 60, 40, 2])
        once, _ = filter_lopsided(votes)
        twice, removed = filter_lopsided(once)
        assert removed == ()
        assert np.array_equal(once.cells, twice.cells)

    def test_bad_bounds(self):
        votes = self._votes([50])
        with pytest.raises(ValueError):
            filter_lopsided(votes, 0.9, 0.1)


class TestEffectiveParties:
    def test_two_equal(self):
        assert effective_parties([0.5, 0.5]) == pytest.approx(2.0)

    def test_single(self):
        assert effective_parties([1.0]) == pytest.approx(1.0)

    def test_k_equal_shares(self):
        for k in (2, 3, 7):
            assert effective_parties([1.0 / k] * k) == pytest.approx(k)

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            effective_parties([1.2, -0.2])

    def test_rejects_bad_sum(self):
        with pytest.raises(ValueError):
            effective_parties([0.5, 0.6])

    @given(st.lists(st.floats(0.01, 10.0), min_size=1, max_size=8),
           st.randoms(use_true_random=False))
    @settings(max_examples=50, deadline=None)
    def test_permutation_invariant(self, raw, rnd):
        shares = np.asarray(raw) / np.sum(raw)
        shuffled = list(shares)
        rnd.shuffle(shuffled)
        assert effective_parties(shares) == pytest.approx(
            effective_parties(shuffled), rel=1e-12)


class TestCovariates:
    def _votes(self, bill_ids):
        cells = np.tile(np.array([[1], [0]], dtype=np.int8), (1, len(bill_ids)))
        return VoteMatrix(cells, ("l1", "l2"), tuple(bill_ids))

    def test_load_and_align(self, tmp_path):
        path = write(tmp_path, "c.csv",
                     "bill,intercept,t1\nb2,1,0.3\nb1,1,0.7\n")
        cov = load_covariates(path)
        votes = self._votes(["b1", "b2"])
        aligned = validate_covariates(cov, votes)
        assert aligned.bill_ids == ("b1", "b2")
        assert aligned.values[:, 1].tolist() == [0.7, 0.3]

    def test_intercept_enforced(self):
        with pytest.raises(ValueError, match="intercept"):
            CovariateMatrix(np.array([[2.0, 0.5]]), ("intercept", "t"), ("b1",))

    def test_simplex_bound(self):
        with pytest.raises(ValueError, match="simplex"):
            CovariateMatrix(
                np.array([[1.0, 0.7, 0.6]]), ("intercept", "t1", "t2"), ("b1",),
                simplex_columns=(1, 2),
            )

    def test_reference_coding_accepted(self):
        # 7 of 8 simplex columns plus intercept: full rank
        rng = np.random.default_rng(0)
        full = rng.dirichlet(np.ones(8), size=30)
        X = np.column_stack([np.ones(30), full[:, :7]])
        names = ("intercept",) + tuple(f"t{k}" for k in range(7))
        cov = CovariateMatrix(X, names, tuple(f"b{j}" for j in range(30)),
                              simplex_columns=tuple(range(1, 8)))
        votes = self._votes([f"b{j}" for j in range(30)])
        assert validate_covariates(cov, votes).n_covariates == 8

    def test_full_simplex_collinear(self):
        rng = np.random.default_rng(0)
        full = rng.dirichlet(np.ones(4), size=20)
        X = np.column_stack([np.ones(20), full])
        names = ("intercept", "t0", "t1", "t2", "t3")
        cov = CovariateMatrix(X, names, tuple(f"b{j}" for j in range(20)))
        votes = self._votes([f"b{j}" for j in range(20)])
        with pytest.raises(ValueError, match="collinear"):
            validate_covariates(cov, votes)

    def test_mismatched_bills(self):
        cov = CovariateMatrix(np.array([[1.0]]), ("intercept",), ("bX",))
        with pytest.raises(ValueError, match="align"):
            validate_covariates(cov, self._votes(["b1"]))

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError, match="finite"):
            CovariateMatrix(np.array([[1.0, np.nan]]), ("intercept", "t"), ("b1",))


class TestParties:
    def test_load(self, tmp_path):
        path = write(tmp_path, "p.csv", "l1,Red\nl2,Blue\nl3,Red\n")
        roster = load_parties(path)
        assert roster.parties == ("Blue", "Red")
        assert roster.members("Red") == ("l1", "l3")
        assert roster.label("l2") == "Blue"

    def test_duplicate(self, tmp_path):
        path = write(tmp_path, "p.csv", "l1,Red\nl1,Blue\n")
        with pytest.raises(ValueError, match="duplicate"):
            load_parties(path)

    def test_coverage_check(self):
        roster = PartyRoster({"l1": "Red"})
        votes = VoteMatrix(np.array([[1], [0]], dtype=np.int8), ("l1", "l2"), ("b1",))
        with pytest.raises(ValueError, match="l2"):
            roster.check_covers(votes)
