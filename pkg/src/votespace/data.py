"""Roll-call data containers, delimited-file loaders, and descriptive indices.

File formats (all comma-separated text):

* vote file: header row of bill ids (first cell is a corner label), one row
  per legislator with the legislator id first, cells in ``{1, 0, NA}``;
* covariate file: header row of covariate names, one row per bill with the
  bill id first, real-valued cells;
* party file: two columns per row, legislator id then party label.

Cells use ``1`` for a supporting vote, ``0`` for explicit non-support, and
``NA`` for votes that are institutionally missing. Loaders reject files with
rows or columns that carry no observed votes; the containers themselves stay
permissive so that degenerate matrices can be built directly in validation
experiments.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np
import scipy.linalg

MISSING = -1
YEA = 1
NOT_YEA = 0

#: Relative threshold on singular values for the design-matrix rank check.
RANK_RTOL = 1e-8


@dataclass(frozen=True)
class VoteCoding:
    """Mapping from file tokens to the three cell states."""

    yea: frozenset
    not_yea: frozenset
    missing: frozenset

    def __post_init__(self):
        object.__setattr__(self, "yea", frozenset(self.yea))
        object.__setattr__(self, "not_yea", frozenset(self.not_yea))
        object.__setattr__(self, "missing", frozenset(self.missing))
        seen = set()
        for group in (self.yea, self.not_yea, self.missing):
            if seen & group:
                raise ValueError(f"vote coding assigns tokens twice: {seen & group}")
            seen |= group

    def decode(self, token: str) -> int:
        if token in self.yea:
            return YEA
        if token in self.not_yea:
            return NOT_YEA
        if token in self.missing:
            return MISSING
        raise KeyError(token)


NUMERIC_CODING = VoteCoding(yea={"1"}, not_yea={"0"}, missing={"NA"})
#: Coding for minutes-style category tokens: support vs explicit non-support,
#: with non-participation treated as missing.
PLENARY_CODING = VoteCoding(
    yea={"Yea"}, not_yea={"Nay", "Abstention"}, missing={"NA", "Absence"}
)


@dataclass(frozen=True)
class VoteMatrix:
    """Ternary legislator-by-bill vote matrix.

    ``cells`` holds ``YEA``/``NOT_YEA``/``MISSING`` as int8 and is frozen
    after construction.
    """

    cells: np.ndarray
    legislator_ids: tuple
    bill_ids: tuple

    def __post_init__(self):
        cells = np.asarray(self.cells, dtype=np.int8)
        if cells.ndim != 2:
            raise ValueError("cells must be a 2-d array")
        if cells.shape != (len(self.legislator_ids), len(self.bill_ids)):
            raise ValueError(
                f"cells shape {cells.shape} does not match id lists "
                f"({len(self.legislator_ids)} legislators, {len(self.bill_ids)} bills)"
            )
        bad = ~np.isin(cells, (YEA, NOT_YEA, MISSING))
        if bad.any():
            i, j = np.argwhere(bad)[0]
            raise ValueError(f"invalid cell state at ({i}, {j}): {cells[i, j]}")
        cells.flags.writeable = False
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "legislator_ids", tuple(self.legislator_ids))
        object.__setattr__(self, "bill_ids", tuple(self.bill_ids))

    @property
    def n_legislators(self) -> int:
        return self.cells.shape[0]

    @property
    def n_bills(self) -> int:
        return self.cells.shape[1]

    @property
    def observed(self) -> np.ndarray:
        """Boolean mask of non-missing cells."""
        return self.cells != MISSING

    def n_observed(self) -> int:
        return int(self.observed.sum())

    def yea_rates(self, axis: int = 0) -> np.ndarray:
        """Yea proportion over non-missing cells; NaN where nothing observed.

        ``axis=0`` gives per-bill rates, ``axis=1`` per-legislator rates.
        """
        obs = self.observed
        yea = (self.cells == YEA) & obs
        counts = obs.sum(axis=axis)
        with np.errstate(invalid="ignore"):
            return np.where(counts > 0, yea.sum(axis=axis) / counts, np.nan)

    def check_no_blank_units(self) -> None:
        obs = self.observed
        blank_rows = np.flatnonzero(~obs.any(axis=1))
        if blank_rows.size:
            raise ValueError(
                f"legislator {self.legislator_ids[blank_rows[0]]!r} has no observed votes"
            )
        blank_cols = np.flatnonzero(~obs.any(axis=0))
        if blank_cols.size:
            raise ValueError(
                f"bill {self.bill_ids[blank_cols[0]]!r} has no observed votes"
            )


def load_votes(path: str | Path, coding: VoteCoding = NUMERIC_CODING) -> VoteMatrix:
    """Load and validate a vote file.

    Raises ``ValueError`` for empty files, ragged rows, unknown tokens
    (identified by legislator and bill), duplicate ids, and rows or columns
    without any observed vote.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: no rows")
    header = rows[0]
    if len(header) < 2:
        raise ValueError(f"{path}: header has no bill ids")
    bill_ids = tuple(tok.strip() for tok in header[1:])
    if len(set(bill_ids)) != len(bill_ids):
        raise ValueError(f"{path}: duplicate bill ids")
    body = rows[1:]
    if not body:
        raise ValueError(f"{path}: no rows")

    legislator_ids = []
    cells = np.empty((len(body), len(bill_ids)), dtype=np.int8)
    for r, row in enumerate(body):
        if len(row) != len(bill_ids) + 1:
            raise ValueError(
                f"{path}: row {r + 2} has {len(row) - 1} cells, expected {len(bill_ids)}"
            )
        leg = row[0].strip()
        legislator_ids.append(leg)
        for c, token in enumerate(row[1:]):
            try:
                cells[r, c] = coding.decode(token.strip())
            except KeyError:
                raise ValueError(
                    f"{path}: unknown vote token {token.strip()!r} for "
                    f"legislator {leg!r}, bill {bill_ids[c]!r}"
                ) from None
    if len(set(legislator_ids)) != len(legislator_ids):
        raise ValueError(f"{path}: duplicate legislator ids")

    votes = VoteMatrix(cells, tuple(legislator_ids), bill_ids)
    votes.check_no_blank_units()
    return votes


def write_votes(votes: VoteMatrix, path: str | Path) -> None:
    """Write a vote file that :func:`load_votes` reads back bit-exactly."""
    tokens = {YEA: "1", NOT_YEA: "0", MISSING: "NA"}
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["legislator", *votes.bill_ids])
        for i, leg in enumerate(votes.legislator_ids):
            writer.writerow([leg, *(tokens[int(v)] for v in votes.cells[i])])


def filter_lopsided(
    votes: VoteMatrix, lo: float = 0.025, hi: float = 0.975
) -> tuple[VoteMatrix, tuple]:
    """Drop bills whose yea rate over observed votes falls outside [lo, hi].

    Returns the filtered matrix and the removed bill ids for audit. Raises
    if every bill is removed.
    """
    if not (0.0 <= lo < hi <= 1.0):
        raise ValueError("need 0 <= lo < hi <= 1")
    rates = votes.yea_rates(axis=0)
    with np.errstate(invalid="ignore"):
        keep = (rates >= lo) & (rates <= hi)
    if not keep.any():
        raise ValueError("empty agenda: lopsided filter removed every bill")
    removed = tuple(b for b, k in zip(votes.bill_ids, keep) if not k)
    if not removed:
        return votes, ()
    kept = VoteMatrix(
        votes.cells[:, keep],
        votes.legislator_ids,
        tuple(b for b, k in zip(votes.bill_ids, keep) if k),
    )
    return kept, removed


def effective_parties(shares: Iterable[float]) -> float:
    """Inverse Herfindahl index 1 / sum(s_i^2) of a seat-share vector."""
    s = np.asarray(list(shares), dtype=float)
    if s.size == 0:
        raise ValueError("no shares given")
    if (s < 0).any():
        raise ValueError("shares must be nonnegative")
    total = s.sum()
    if total <= 0:
        raise ValueError("shares sum to zero")
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"shares must sum to 1 (got {total})")
    return float(1.0 / np.sum(s**2))


@dataclass(frozen=True)
class CovariateMatrix:
    """Bill-level design matrix with an identically-one intercept column.

    ``simplex_columns`` flags covariates derived from a proportion simplex
    under reference coding: their per-row sum must lie in [0, 1].
    """

    values: np.ndarray
    column_names: tuple
    bill_ids: tuple
    intercept_column: int = 0
    simplex_columns: tuple = ()

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise ValueError("values must be a 2-d array")
        if values.shape != (len(self.bill_ids), len(self.column_names)):
            raise ValueError("values shape does not match id/name lists")
        if not np.isfinite(values).all():
            raise ValueError("covariates contain non-finite entries")
        if not 0 <= self.intercept_column < values.shape[1]:
            raise ValueError("intercept_column out of range")
        if not np.all(values[:, self.intercept_column] == 1.0):
            raise ValueError(
                f"intercept column {self.column_names[self.intercept_column]!r} "
                "is not identically 1"
            )
        simplex = tuple(self.simplex_columns)
        if simplex:
            sums = values[:, list(simplex)].sum(axis=1)
            if (sums < -1e-9).any() or (sums > 1.0 + 1e-9).any():
                j = int(np.argmax((sums < -1e-9) | (sums > 1.0 + 1e-9)))
                raise ValueError(
                    f"simplex-coded covariates of bill {self.bill_ids[j]!r} "
                    f"sum to {sums[j]}, outside [0, 1]"
                )
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "column_names", tuple(self.column_names))
        object.__setattr__(self, "bill_ids", tuple(self.bill_ids))
        object.__setattr__(self, "simplex_columns", simplex)

    @property
    def n_bills(self) -> int:
        return self.values.shape[0]

    @property
    def n_covariates(self) -> int:
        return self.values.shape[1]


def load_covariates(
    path: str | Path,
    intercept_name: str = "intercept",
    simplex_names: Iterable[str] = (),
) -> CovariateMatrix:
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: no rows")
    names = tuple(tok.strip() for tok in rows[0][1:])
    if intercept_name not in names:
        raise ValueError(f"{path}: no column named {intercept_name!r}")
    body = rows[1:]
    if not body:
        raise ValueError(f"{path}: no rows")
    bill_ids = []
    values = np.empty((len(body), len(names)), dtype=float)
    for r, row in enumerate(body):
        if len(row) != len(names) + 1:
            raise ValueError(f"{path}: row {r + 2} has the wrong number of cells")
        bill_ids.append(row[0].strip())
        try:
            values[r] = [float(tok) for tok in row[1:]]
        except ValueError:
            raise ValueError(f"{path}: non-numeric cell in row {r + 2}") from None
    simplex_names = tuple(simplex_names)
    missing = [n for n in simplex_names if n not in names]
    if missing:
        raise ValueError(f"{path}: unknown simplex columns {missing}")
    return CovariateMatrix(
        values,
        names,
        tuple(bill_ids),
        intercept_column=names.index(intercept_name),
        simplex_columns=tuple(names.index(n) for n in simplex_names),
    )


def write_covariates(cov: CovariateMatrix, path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bill", *cov.column_names])
        for j, bill in enumerate(cov.bill_ids):
            writer.writerow([bill, *(repr(float(v)) for v in cov.values[j])])


def validate_covariates(cov: CovariateMatrix, votes: VoteMatrix) -> CovariateMatrix:
    """Align a covariate matrix to the vote matrix's bill order and check rank.

    The bill id sets must coincide. Rank deficiency is reported with the
    names of the dependent columns (QR pivots beyond the numerical rank).
    """
    cov_ids = set(cov.bill_ids)
    vote_ids = set(votes.bill_ids)
    if cov_ids != vote_ids:
        extra = sorted(cov_ids - vote_ids)[:5]
        absent = sorted(vote_ids - cov_ids)[:5]
        raise ValueError(
            f"bill ids do not align: {len(extra)} extra (e.g. {extra}), "
            f"{len(absent)} missing (e.g. {absent})"
        )
    order = [cov.bill_ids.index(b) for b in votes.bill_ids]
    values = cov.values[order]

    svals = np.linalg.svd(values, compute_uv=False)
    if svals[-1] <= RANK_RTOL * svals[0]:
        _, _, piv = scipy.linalg.qr(values, pivoting=True, mode="economic")
        rank = int(np.sum(svals > RANK_RTOL * svals[0]))
        dependent = sorted(cov.column_names[j] for j in piv[rank:])
        raise ValueError(
            "design matrix is rank deficient; collinear columns: "
            + ", ".join(dependent)
        )
    return CovariateMatrix(
        values,
        cov.column_names,
        votes.bill_ids,
        intercept_column=cov.intercept_column,
        simplex_columns=cov.simplex_columns,
    )


@dataclass(frozen=True)
class PartyRoster:
    """Immutable legislator-to-party assignment."""

    assignments: Mapping[str, str]

    def __post_init__(self):
        object.__setattr__(self, "assignments", dict(self.assignments))

    @property
    def parties(self) -> tuple:
        return tuple(sorted(set(self.assignments.values())))

    def label(self, legislator_id: str) -> str:
        return self.assignments[legislator_id]

    def members(self, party: str) -> tuple:
        return tuple(
            sorted(l for l, p in self.assignments.items() if p == party)
        )

    def check_covers(self, votes: VoteMatrix) -> None:
        missing = [l for l in votes.legislator_ids if l not in self.assignments]
        if missing:
            raise ValueError(f"legislators without a party label: {missing[:5]}")


def load_parties(path: str | Path) -> PartyRoster:
    path = Path(path)
    assignments = {}
    with path.open(newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 2:
                raise ValueError(f"{path}:{lineno}: expected two columns")
            leg, party = row[0].strip(), row[1].strip()
            if leg in assignments:
                raise ValueError(f"{path}:{lineno}: duplicate legislator {leg!r}")
            assignments[leg] = party
    if not assignments:
        raise ValueError(f"{path}: no rows")
    return PartyRoster(assignments)


def write_parties(roster: PartyRoster, path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        for leg in sorted(roster.assignments):
            writer.writerow([leg, roster.assignments[leg]])
