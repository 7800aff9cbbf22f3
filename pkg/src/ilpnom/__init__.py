"""Supervised vertex nomination: learn a query-specific weighting of several
dissimilarities so that known-similar items rank first."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    ItemId,
    NominationList,
    PersonalDissimilarityMatrix,
    SupervisionInstance,
    WeightVector,
    ingest_matrix,
    restrict_to_candidates,
)
from .ranking import fuse, mean_reciprocal_rank, natural_ranker, ranker_for_weights  # noqa: E402
from .ilp import IlpModel, IlpSolution, Status, build_model, solution_to_ranker, solve  # noqa: E402
from .solver import SolverConfig, branch_and_bound, lp_solve  # noqa: E402

__all__ = [
    "ItemId", "NominationList", "PersonalDissimilarityMatrix", "SupervisionInstance",
    "WeightVector", "ingest_matrix", "restrict_to_candidates", "fuse",
    "mean_reciprocal_rank", "natural_ranker", "ranker_for_weights", "IlpModel",
    "IlpSolution", "Status", "build_model", "solution_to_ranker", "solve",
    "SolverConfig", "branch_and_bound", "lp_solve",
]
