"""The min-max-rank integer linear program.

Variables are ordered ``[alpha_1 .. alpha_J, x_c1 .. x_c|C|]`` where the
``x`` follow ascending candidate row index. For every pair ``(s, v)`` in
``S x C`` the model carries the row::

    sum_j alpha_j * (d_j(s) - d_j(v)) - M * x_v <= 0

plus the normalization ``sum_j alpha_j = 1``. The objective is
``sum_v x_v``: the number of candidates ranked ahead of the worst member
of S. A candidate that exactly ties the worst S value may take ``x_v = 0``,
so ties are resolved in favor of S.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Optional, Tuple

import numpy as np

from .core import (
    NominationList,
    PersonalDissimilarityMatrix,
    SupervisionInstance,
    WeightVector,
)
from .ranking import ranker_for_weights


class Status(str, Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    ITERATION_LIMIT = "IterationLimit"


@dataclass(frozen=True, eq=False)
class IlpModel:
    matrix: PersonalDissimilarityMatrix
    instance: SupervisionInstance
    big_m: float
    objective: np.ndarray
    a_ub: np.ndarray
    b_ub: np.ndarray
    a_eq: np.ndarray
    b_eq: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    # (s row, v row) for each big-M row, in row order
    pairs: Tuple[Tuple[int, int], ...]

    @property
    def num_alpha(self) -> int:
        return self.matrix.n_reps

    @property
    def num_binary(self) -> int:
        return len(self.candidate_rows)

    @property
    def num_vars(self) -> int:
        return self.num_alpha + self.num_binary

    @property
    def s_rows(self) -> np.ndarray:
        return self.instance.s_rows

    @property
    def candidate_rows(self) -> np.ndarray:
        return self.instance.candidate_rows

    @property
    def integrality(self) -> np.ndarray:
        """Boolean mask of integer variables."""
        return np.arange(self.num_vars) >= self.num_alpha

    @property
    def constraints(self) -> Iterator[Tuple[np.ndarray, str, float]]:
        """Rows as ``(coefficients, relation, rhs)``."""
        for row, rhs in zip(self.a_ub, self.b_ub):
            yield row, "<=", float(rhs)
        for row, rhs in zip(self.a_eq, self.b_eq):
            yield row, "=", float(rhs)

    def max_violation(self, alpha, x) -> float:
        """Largest constraint or bound violation of the point ``(alpha, x)``."""
        z = np.concatenate([np.asarray(alpha, float), np.asarray(x, float)])
        viol = [0.0]
        if self.b_ub.size:
            viol.append(float(np.max(self.a_ub @ z - self.b_ub)))
        viol.append(float(np.max(np.abs(self.a_eq @ z - self.b_eq))))
        viol.append(float(np.max(self.lower - z)))
        viol.append(float(np.max(z - self.upper)))
        return max(viol)


@dataclass(frozen=True, eq=False)
class IlpSolution:
    alpha: WeightVector
    x: np.ndarray
    objective_value: int
    status: Status
    nodes: int = 0
    lp_iterations: int = 0
    # proven lower bound on the optimum; equals objective_value when Optimal
    lower_bound: int = 0
    elapsed: float = 0.0

    def __post_init__(self):
        x = np.asarray(self.x, dtype=int)
        object.__setattr__(self, "x", x)
        if int(x.sum()) != self.objective_value:
            raise ValueError("objective_value must equal the number of ones in x")


def build_model(matrix: PersonalDissimilarityMatrix, inst: SupervisionInstance) -> IlpModel:
    """Assemble the big-M program for ``matrix`` and supervision ``inst``."""
    if inst.n_items != matrix.n_items:
        raise ValueError(
            f"instance covers {inst.n_items} rows but matrix has {matrix.n_items}")
    s_rows = inst.s_rows
    c_rows = inst.candidate_rows
    if c_rows.size == 0:
        raise ValueError("candidate set is empty; nothing to rank against")
    J = matrix.n_reps
    nc = c_rows.size
    d = matrix.entries
    big_m = float(d.max())

    pairs = [(int(s), int(v)) for s in s_rows for v in c_rows]
    a_ub = np.zeros((len(pairs), J + nc))
    for r, (s, v) in enumerate(pairs):
        a_ub[r, :J] = d[s] - d[v]
    # column of x_v for each row; pairs iterate v fastest
    a_ub[np.arange(len(pairs)), J + np.tile(np.arange(nc), s_rows.size)] = -big_m
    a_eq = np.zeros((1, J + nc))
    a_eq[0, :J] = 1.0

    objective = np.concatenate([np.zeros(J), np.ones(nc)])
    lower = np.zeros(J + nc)
    upper = np.concatenate([np.full(J, np.inf), np.ones(nc)])
    return IlpModel(matrix, inst, big_m, objective, a_ub, np.zeros(len(pairs)),
                    a_eq, np.ones(1), lower, upper, tuple(pairs))


def solve(model: IlpModel, cfg=None, trace=None) -> IlpSolution:
    """Solve ``model`` with the bundled branch and bound."""
    from .solver import SolverConfig, branch_and_bound

    return branch_and_bound(model, cfg if cfg is not None else SolverConfig(), trace=trace)


def solution_to_ranker(matrix: PersonalDissimilarityMatrix, solution: IlpSolution) -> NominationList:
    if solution.status is Status.INFEASIBLE:
        raise ValueError("infeasible solutions do not define a ranker")
    return ranker_for_weights(matrix, solution.alpha)


def _fmt(v: float) -> str:
    return repr(float(v))


def export_lp(model: IlpModel, name: Optional[str] = None) -> str:
    """Render the model in CPLEX LP text format.

    Weights are named ``a1 .. aJ`` and binaries ``x<row>`` after the
    candidate's matrix row. Big-M rows are named ``bigm_<s>_<v>`` and the
    normalization row ``norm``. Zero coefficients are omitted.
    """
    J = model.num_alpha
    names = [f"a{j + 1}" for j in range(J)] + [f"x{v}" for v in model.candidate_rows]

    def expr(coefs) -> str:
        parts = []
        for c, nm in zip(coefs, names):
            if c == 0:
                continue
            sign = "-" if c < 0 else "+"
            parts.append(f"{sign} {_fmt(abs(c))} {nm}")
        if not parts:
            return "0 a1"
        out = " ".join(parts)
        return out[2:] if out.startswith("+ ") else out

    lines = [f"\\ {name or 'min-max-rank nomination program'}", "Minimize",
             f" obj: {expr(model.objective)}", "Subject To"]
    for (s, v), row in zip(model.pairs, model.a_ub):
        lines.append(f" bigm_{s}_{v}: {expr(row)} <= 0")
    lines.append(f" norm: {expr(model.a_eq[0])} = 1")
    lines.append("Bounds")
    for nm in names[:J]:
        lines.append(f" {nm} >= 0")
    for nm in names[J:]:
        lines.append(f" 0 <= {nm} <= 1")
    lines.append("Binaries")
    lines.extend(f" {nm}" for nm in names[J:])
    lines.append("End")
    return "\n".join(lines) + "\n"
