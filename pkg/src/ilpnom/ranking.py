"""Natural nomination from a dissimilarity, fused rankers and MRR."""

from __future__ import annotations

from typing import Iterable, Optional

import numpy as np

from .core import (
    NominationList,
    PersonalDissimilarityMatrix,
    SupervisionInstance,
    WeightVector,
    restrict_to_candidates,
)


def natural_ranker(values, rows: Optional[np.ndarray] = None) -> NominationList:
    """Rank items by ascending dissimilarity; ties go to the lower row index.

    >>> natural_ranker([0.4, 0.4, 0.1]).ranks.tolist()
    [2, 3, 1]
    """
    vals = np.asarray(values, dtype=float).reshape(-1)
    if not np.all(np.isfinite(vals)):
        raise ValueError("dissimilarities must be finite")
    if rows is None:
        rows = np.arange(vals.size)
    rows = np.asarray(rows, dtype=int)
    # lexsort: last key is primary
    order = np.lexsort((rows, vals))
    ranks = np.empty(vals.size, dtype=int)
    ranks[order] = np.arange(1, vals.size + 1)
    return NominationList(rows, ranks, vals)


def fuse(matrix: PersonalDissimilarityMatrix, alpha: WeightVector) -> np.ndarray:
    """Weighted sum of the representation columns, one value per row."""
    if len(alpha) != matrix.n_reps:
        raise ValueError(
            f"weight length {len(alpha)} does not match {matrix.n_reps} representations")
    a = alpha.alpha
    nz = np.flatnonzero(a)
    if nz.size == 1 and a[nz[0]] == 1.0:
        # exact copy for basis vectors
        return matrix.entries[:, nz[0]].copy()
    return matrix.entries @ a


def ranker_for_weights(matrix: PersonalDissimilarityMatrix, alpha: WeightVector) -> NominationList:
    return natural_ranker(fuse(matrix, alpha))


def mean_reciprocal_rank(nlist: NominationList, subset: Iterable[int],
                         inst: Optional[SupervisionInstance] = None) -> float:
    """Average of ``1 / rank`` over ``subset``.

    When ``inst`` is given the ranks are taken from the list restricted to
    the candidate set, so ``subset`` must avoid S.
    """
    subset = sorted(set(int(s) for s in subset))
    if not subset:
        raise ValueError("MRR needs a non-empty subset")
    if inst is not None:
        nlist = restrict_to_candidates(nlist, inst)
    rank_of = nlist.rank_of()
    missing = [s for s in subset if s not in rank_of]
    if missing:
        raise ValueError(f"rows {missing} are not in the nomination list")
    return float(np.mean([1.0 / rank_of[s] for s in subset]))


def prefers(mrr_a: float, mrr_b: float) -> bool:
    """True when a ranker with MRR ``mrr_a`` is strictly preferred."""
    return mrr_a > mrr_b


def worst_rank(nlist: NominationList, rows: Iterable[int]) -> int:
    """Largest rank held by any of ``rows``; the quantity the ILP minimizes."""
    rank_of = nlist.rank_of()
    return max(rank_of[int(r)] for r in rows)


def count_beating_worst(fused, inst: SupervisionInstance, tol: float = 0.0) -> int:
    """Number of candidates whose fused value is below the worst S value.

    A candidate within ``tol`` of the worst S value counts as tied, and ties
    go to S.
    """
    fused = np.asarray(fused, dtype=float)
    worst = fused[inst.s_rows].max()
    return int(np.count_nonzero(fused[inst.candidate_rows] < worst - tol))
