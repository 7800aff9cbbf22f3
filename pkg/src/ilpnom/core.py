"""Domain types shared across the package.

Rows of a :class:`PersonalDissimilarityMatrix` are the non-query items,
indexed ``0 .. n-2``; the query item itself is held outside the matrix.
Ranks are 1-based.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

SIMPLEX_TOL = 1e-9


@dataclass(frozen=True)
class ItemId:
    index: int
    label: Optional[str] = None

    def __post_init__(self):
        if self.index < 0:
            raise ValueError(f"item index must be nonnegative, got {self.index}")


@dataclass(frozen=True, eq=False)
class PersonalDissimilarityMatrix:
    """Dissimilarities from the query to every other item, one column per
    representation.

    ``column_shift[j]`` is the constant that was added to column ``j`` at
    ingest to make it nonnegative.
    """

    entries: np.ndarray
    column_shift: np.ndarray
    labels: Optional[tuple] = None

    def __post_init__(self):
        entries = np.array(self.entries, dtype=float)
        if entries.ndim != 2:
            raise ValueError("dissimilarity matrix must be 2-D")
        if entries.shape[0] < 2 or entries.shape[1] < 1:
            raise ValueError(
                f"need at least 2 rows and 1 column, got shape {entries.shape}")
        if not np.all(np.isfinite(entries)):
            raise ValueError("dissimilarity matrix has non-finite entries")
        if np.any(entries < 0):
            raise ValueError("stored dissimilarities must be nonnegative; use ingest_matrix")
        shift = np.array(self.column_shift, dtype=float).reshape(-1)
        if shift.shape != (entries.shape[1],):
            raise ValueError("column_shift length must equal the number of columns")
        if self.labels is not None and len(self.labels) != entries.shape[0]:
            raise ValueError("labels length must equal the number of rows")
        entries.setflags(write=False)
        shift.setflags(write=False)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "column_shift", shift)
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def n_items(self) -> int:
        return self.entries.shape[0]

    @property
    def n_reps(self) -> int:
        return self.entries.shape[1]

    def column(self, j: int) -> np.ndarray:
        return self.entries[:, j]

    def label(self, row: int) -> str:
        return self.labels[row] if self.labels is not None else str(row)


@dataclass(frozen=True)
class SupervisionInstance:
    """Known-similar rows ``s_set`` and the induced candidate rows."""

    n_items: int
    s_set: frozenset
    query: ItemId = field(default_factory=lambda: ItemId(0))

    def __post_init__(self):
        s = frozenset(int(i) for i in self.s_set)
        if not s:
            raise ValueError("supervision set S must be non-empty")
        bad = [i for i in s if not 0 <= i < self.n_items]
        if bad:
            raise ValueError(f"S contains out-of-range rows {sorted(bad)}")
        if len(s) >= self.n_items:
            raise ValueError("S must leave at least one candidate")
        object.__setattr__(self, "s_set", s)

    @classmethod
    def from_rows(cls, n_items: int, rows: Iterable[int], query: Optional[ItemId] = None):
        if query is None:
            return cls(n_items, frozenset(rows))
        return cls(n_items, frozenset(rows), query)

    @property
    def candidate_set(self) -> frozenset:
        return frozenset(range(self.n_items)) - self.s_set

    @property
    def s_rows(self) -> np.ndarray:
        """Sorted S rows as an index array."""
        return np.array(sorted(self.s_set), dtype=int)

    @property
    def candidate_rows(self) -> np.ndarray:
        return np.array(sorted(self.candidate_set), dtype=int)


@dataclass(frozen=True, eq=False)
class WeightVector:
    alpha: np.ndarray

    def __post_init__(self):
        a = np.array(self.alpha, dtype=float).reshape(-1)
        if a.size == 0:
            raise ValueError("weight vector must be non-empty")
        if not np.all(np.isfinite(a)) or np.any(a < 0):
            raise ValueError(f"weights must be finite and nonnegative: {a}")
        if abs(a.sum() - 1.0) > SIMPLEX_TOL:
            raise ValueError(f"weights must sum to 1, got {a.sum()!r}")
        a.setflags(write=False)
        object.__setattr__(self, "alpha", a)

    @classmethod
    def project(cls, raw: Sequence[float]) -> "WeightVector":
        """Clip tiny negatives and renormalize, e.g. for LP output."""
        a = np.clip(np.asarray(raw, dtype=float), 0.0, None)
        total = a.sum()
        if total <= 0:
            raise ValueError("cannot normalize an all-zero weight vector")
        return cls(a / total)

    @classmethod
    def basis(cls, j: int, size: int) -> "WeightVector":
        a = np.zeros(size)
        a[j] = 1.0
        return cls(a)

    def __len__(self):
        return self.alpha.size

    def __eq__(self, other):
        return isinstance(other, WeightVector) and np.array_equal(self.alpha, other.alpha)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class NominationList:
    """A total ranking over rows ``rows`` (ranks are 1-based).

    ``ranks[i]`` is the rank of ``rows[i]``; ``fused_values[i]`` is the
    dissimilarity that induced it.
    """

    rows: np.ndarray
    ranks: np.ndarray
    fused_values: np.ndarray

    def __post_init__(self):
        rows = np.array(self.rows, dtype=int).reshape(-1)
        ranks = np.array(self.ranks, dtype=int).reshape(-1)
        vals = np.array(self.fused_values, dtype=float).reshape(-1)
        if not (rows.size == ranks.size == vals.size):
            raise ValueError("rows, ranks and fused_values must have equal length")
        if not np.array_equal(np.sort(ranks), np.arange(1, ranks.size + 1)):
            raise ValueError("ranks must be a permutation of 1..len")
        for arr in (rows, ranks, vals):
            arr.setflags(write=False)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "ranks", ranks)
        object.__setattr__(self, "fused_values", vals)

    def __len__(self):
        return self.rows.size

    def rank_of(self) -> dict:
        """Mapping row -> rank."""
        return dict(zip(self.rows.tolist(), self.ranks.tolist()))

    def order(self) -> np.ndarray:
        """Rows sorted from rank 1 downward."""
        return self.rows[np.argsort(self.ranks, kind="stable")]


def ingest_matrix(raw, labels: Optional[Sequence[str]] = None) -> PersonalDissimilarityMatrix:
    """Validate a raw (n-1) x J dissimilarity matrix and shift each column
    to be nonnegative.

    Column ``j`` receives ``c_j = max(0, -min(column j))``. For any weights
    on the simplex every item's fused value moves by the same constant, so
    rankings are untouched.
    """
    arr = np.asarray(raw, dtype=float)
    if arr.size == 0:
        raise ValueError("empty dissimilarity matrix")
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError(f"dissimilarity matrix must be 2-D, got {arr.ndim}-D")
    bad = np.argwhere(~np.isfinite(arr))
    if bad.size:
        r, c = bad[0]
        raise ValueError(f"non-finite entry at row {r}, column {c}: {arr[r, c]!r}")
    shift = np.maximum(0.0, -arr.min(axis=0))
    # adding 0.0 to a column keeps it bit-identical
    return PersonalDissimilarityMatrix(arr + shift, shift, None if labels is None else tuple(labels))


def restrict_to_candidates(nlist: NominationList, inst: SupervisionInstance) -> NominationList:
    """Drop S from a nomination list, closing the gaps left in the ranks.

    A candidate's new rank is its old rank minus the number of S members
    ranked above it.
    """
    if set(nlist.rows.tolist()) != set(range(inst.n_items)):
        raise ValueError("nomination list must cover every row of the instance")
    keep = ~np.isin(nlist.rows, inst.s_rows)
    s_ranks = np.sort(nlist.ranks[~keep])
    cand_ranks = nlist.ranks[keep]
    new_ranks = cand_ranks - np.searchsorted(s_ranks, cand_ranks)
    return NominationList(nlist.rows[keep], new_ranks, nlist.fused_values[keep])
