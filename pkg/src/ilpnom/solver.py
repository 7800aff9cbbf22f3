"""Dense bounded-variable revised simplex and a best-bound branch and bound
for the 0/1 nomination program.

The simplex keeps an explicit basis inverse updated by elementary row
operations and refactorized periodically. Slack and artificial columns are
unit vectors and are never materialized.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .core import WeightVector
from .ilp import IlpModel, IlpSolution, Status
from .ranking import fuse


class LpStatus(str, Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


@dataclass
class LpProblem:
    """minimize c @ x  s.t.  a_ub @ x <= b_ub,  a_eq @ x == b_eq,
    lower <= x <= upper.  Lower bounds must be finite."""

    c: np.ndarray
    a_ub: np.ndarray
    b_ub: np.ndarray
    a_eq: np.ndarray
    b_eq: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).reshape(-1)
        n = self.c.size
        self.a_ub = np.asarray(self.a_ub, dtype=float).reshape(-1, n)
        self.a_eq = np.asarray(self.a_eq, dtype=float).reshape(-1, n)
        self.b_ub = np.asarray(self.b_ub, dtype=float).reshape(-1)
        self.b_eq = np.asarray(self.b_eq, dtype=float).reshape(-1)
        self.lower = np.asarray(self.lower, dtype=float).reshape(-1)
        self.upper = np.asarray(self.upper, dtype=float).reshape(-1)
        if self.b_ub.size != self.a_ub.shape[0] or self.b_eq.size != self.a_eq.shape[0]:
            raise ValueError("row count mismatch between constraint matrix and rhs")
        if self.lower.size != n or self.upper.size != n:
            raise ValueError("bounds must have one entry per variable")
        if not np.all(np.isfinite(self.lower)):
            raise ValueError("lower bounds must be finite")


@dataclass
class LpSolution:
    x: Optional[np.ndarray]
    objective: float
    status: LpStatus
    iterations: int = 0


class _Simplex:
    REFACTOR_EVERY = 64
    DEGENERATE_STREAK = 20
    PIVOT_TOL = 1e-9

    def __init__(self, p: LpProblem, tol: float, max_iter: int):
        self.tol = tol
        self.max_iter = max_iter
        self.n = n = p.c.size
        self.m_ub = m_ub = p.b_ub.size
        self.m = m = m_ub + p.b_eq.size
        self.a = np.vstack([p.a_ub, p.a_eq]) if m else np.zeros((0, n))
        self.b = np.concatenate([p.b_ub, p.b_eq])
        self.c = p.c
        nvar = n + m_ub + m
        self.lo = np.zeros(nvar)
        self.hi = np.full(nvar, np.inf)
        self.lo[:n] = p.lower
        self.hi[:n] = p.upper
        self.art_sign = np.ones(m)
        self.x = np.zeros(nvar)
        self.x[:n] = p.lower
        self.at_upper = np.zeros(nvar, dtype=bool)
        self.iterations = 0

        resid = self.b - self.a @ self.x[:n]
        basis = np.empty(m, dtype=int)
        self.uses_art = np.zeros(m, dtype=bool)
        for i in range(m):
            if i < m_ub and resid[i] >= 0:
                basis[i] = n + i
                self.x[n + i] = resid[i]
            else:
                self.art_sign[i] = 1.0 if resid[i] >= 0 else -1.0
                basis[i] = n + m_ub + i
                self.x[n + m_ub + i] = abs(resid[i])
                self.uses_art[i] = True
        # unused artificials are pinned at zero
        self.hi[n + m_ub:][~self.uses_art] = 0.0
        self.basis = basis
        self.is_basic = np.zeros(nvar, dtype=bool)
        self.is_basic[basis] = True
        self.binv = np.diag(self.art_sign * np.where(self.uses_art, 1.0, 0.0)
                            + np.where(self.uses_art, 0.0, 1.0))

    def column(self, j: int) -> np.ndarray:
        n, m_ub = self.n, self.m_ub
        if j < n:
            return self.a[:, j]
        col = np.zeros(self.m)
        if j < n + m_ub:
            col[j - n] = 1.0
        else:
            i = j - n - m_ub
            col[i] = self.art_sign[i]
        return col

    def refactor(self):
        if self.m == 0:
            return
        bmat = np.column_stack([self.column(j) for j in self.basis])
        self.binv = np.linalg.inv(bmat)
        nonbasic = ~self.is_basic
        rhs = self.b - self.a @ np.where(nonbasic[:self.n], self.x[:self.n], 0.0)
        # nonbasic slacks/artificials sit at bound 0 (or an upper bound of 0)
        self.x[self.basis] = self.binv @ rhs

    def reduced_costs(self, cost: np.ndarray) -> np.ndarray:
        n, m_ub = self.n, self.m_ub
        y = cost[self.basis] @ self.binv
        d = np.empty(cost.size)
        d[:n] = cost[:n] - y @ self.a
        d[n:n + m_ub] = cost[n:n + m_ub] - y[:m_ub]
        d[n + m_ub:] = cost[n + m_ub:] - self.art_sign * y
        return d

    def run(self, cost: np.ndarray) -> LpStatus:
        tol = self.tol
        streak = 0
        since_refactor = 0
        while True:
            if self.iterations >= self.max_iter:
                raise RuntimeError(f"simplex exceeded {self.max_iter} iterations")
            if since_refactor >= self.REFACTOR_EVERY:
                self.refactor()
                since_refactor = 0
            d = self.reduced_costs(cost)
            movable = (~self.is_basic) & (self.hi > self.lo)
            improving = movable & np.where(self.at_upper, d > tol, d < -tol)
            cand = np.flatnonzero(improving)
            if cand.size == 0:
                return LpStatus.OPTIMAL
            bland = streak >= self.DEGENERATE_STREAK
            q = int(cand[0]) if bland else int(cand[np.argmax(np.abs(d[cand]))])
            sigma = -1.0 if self.at_upper[q] else 1.0
            w = self.binv @ self.column(q)
            sw = sigma * w
            xb = self.x[self.basis]
            lob = self.lo[self.basis]
            hib = self.hi[self.basis]
            # Harris ratio test: bound the step with slightly relaxed bounds,
            # then take the largest pivot among rows blocking within it
            ratios = np.full(self.m, np.inf)
            relaxed = np.full(self.m, np.inf)
            piv_tol = max(self.PIVOT_TOL, 1e-7 * np.abs(w).max(initial=0.0))
            dec = sw > piv_tol
            inc = sw < -piv_tol
            ratios[dec] = (xb[dec] - lob[dec]) / sw[dec]
            ratios[inc] = (hib[inc] - xb[inc]) / (-sw[inc])
            relaxed[dec] = (xb[dec] - lob[dec] + tol) / sw[dec]
            relaxed[inc] = (hib[inc] - xb[inc] + tol) / (-sw[inc])
            np.maximum(ratios, 0.0, out=ratios)
            t_flip = self.hi[q] - self.lo[q]
            t_max = relaxed.min() if self.m else np.inf
            if np.isfinite(t_max):
                ties = np.flatnonzero(ratios <= t_max)
                if bland:
                    big = np.abs(w[ties])
                    ties = ties[big >= 1e-3 * big.max()]
                    r = int(ties[np.argmin(self.basis[ties])])
                else:
                    r = int(ties[np.argmax(np.abs(w[ties]))])
                t_row = ratios[r]
            else:
                t_row = np.inf
            t = min(t_row, t_flip)
            if not np.isfinite(t):
                return LpStatus.UNBOUNDED
            self.iterations += 1
            since_refactor += 1
            streak = streak + 1 if t <= 1e-12 else 0

            self.x[self.basis] = xb - t * sw
            if t_flip <= t_row:
                self.x[q] = self.hi[q] if sigma > 0 else self.lo[q]
                self.at_upper[q] = sigma > 0
                continue

            leave = self.basis[r]
            if leave >= self.n + self.m_ub:
                # artificials never re-enter
                self.hi[leave] = 0.0
            to_upper = bool(sw[r] < 0)
            self.x[leave] = self.hi[leave] if to_upper else self.lo[leave]
            self.at_upper[leave] = to_upper
            self.is_basic[leave] = False
            self.x[q] = self.x[q] + sigma * t
            self.basis[r] = q
            self.is_basic[q] = True
            self.at_upper[q] = False

            piv = w[r]
            row = self.binv[r] / piv
            self.binv -= np.outer(w, row)
            self.binv[r] = row

    def solve(self) -> LpSolution:
        n, m_ub = self.n, self.m_ub
        art = slice(n + m_ub, None)
        if self.uses_art.any():
            cost1 = np.zeros(self.x.size)
            cost1[art] = np.where(self.uses_art, 1.0, 0.0)
            self.run(cost1)
            self.refactor()
            infeas = self.x[art].sum()
            if infeas > 1e-7 * max(1.0, np.abs(self.b).max(initial=0.0)):
                return LpSolution(None, math.nan, LpStatus.INFEASIBLE, self.iterations)
        # artificials may stay basic, but only at zero
        self.hi[art] = 0.0
        self.x[art] = 0.0
        cost2 = np.zeros(self.x.size)
        cost2[:n] = self.c
        status = self.run(cost2)
        if status is LpStatus.UNBOUNDED:
            return LpSolution(None, -math.inf, status, self.iterations)
        self.refactor()
        x = np.clip(self.x[:n], self.lo[:n], self.hi[:n])
        return LpSolution(x, float(self.c @ x), LpStatus.OPTIMAL, self.iterations)


def lp_solve(p: LpProblem, tol: float = 1e-9, max_iter: Optional[int] = None) -> LpSolution:
    """Solve a linear program with the bounded-variable revised simplex.

    Dantzig pricing is used until a run of degenerate pivots, after which
    Bland's rule takes over until the objective moves again.
    """
    if max_iter is None:
        max_iter = 50 * (p.c.size + p.b_ub.size + p.b_eq.size) + 1000
    return _Simplex(p, tol, max_iter).solve()


@dataclass(frozen=True)
class SolverConfig:
    node_limit: int = 100_000
    time_budget: float = 600.0
    feas_tol: float = 1e-6
    int_tol: float = 1e-6
    # relative to the big-M constant; fused values this close count as tied
    tie_tol: float = 1e-9
    branching: str = "MostFractional"
    node_order: str = "BestBound"
    # move the final weights off ties when the optimum allows it
    polish: bool = True

    def __post_init__(self):
        if self.node_limit <= 0 or self.time_budget <= 0:
            raise ValueError("node_limit and time_budget must be positive")
        if min(self.feas_tol, self.int_tol, self.tie_tol) <= 0:
            raise ValueError("tolerances must be positive")
        if self.branching != "MostFractional" or self.node_order != "BestBound":
            raise ValueError("only MostFractional branching with BestBound order is supported")

    def as_dict(self) -> dict:
        return {
            "node_limit": self.node_limit,
            "time_budget_s": self.time_budget,
            "feas_tol": self.feas_tol,
            "int_tol": self.int_tol,
            "tie_tol": self.tie_tol,
            "branching": self.branching,
            "node_order": self.node_order,
            "polish": self.polish,
        }


def relaxation(model: IlpModel) -> LpProblem:
    return LpProblem(model.objective, model.a_ub, model.b_ub, model.a_eq, model.b_eq,
                     model.lower, model.upper)


@dataclass(order=True)
class _Node:
    bound: int
    neg_depth: int
    seq: int
    lower: np.ndarray = field(compare=False)
    upper: np.ndarray = field(compare=False)
    rows: np.ndarray = field(compare=False)


def _round_alpha(model: IlpModel, alpha_raw, tie_abs: float):
    """Rounding heuristic: the exact objective of the ranking induced by alpha."""
    alpha = WeightVector.project(alpha_raw)
    fused = fuse(model.matrix, alpha)
    cand = model.candidate_rows
    worst = fused[model.s_rows].max()
    x = (fused[cand] < worst - tie_abs).astype(int)
    return int(x.sum()), alpha, x


def polish_alpha(model: IlpModel, x: np.ndarray):
    """Max-margin weights that keep every ``x_v = 0`` candidate behind all of S.

    Solves ``max t`` s.t. ``f(v) - f(s) >= t`` for all such ``(s, v)`` with
    weights on the simplex. Returns ``(alpha, margin)``.
    """
    J = model.num_alpha
    d = model.matrix.entries
    zero_rows = model.candidate_rows[np.asarray(x) == 0]
    m = max(model.big_m, 1.0)
    if zero_rows.size == 0:
        return None, math.inf
    diff = (d[model.s_rows][:, None, :] - d[zero_rows][None, :, :]).reshape(-1, J)
    a_ub = np.hstack([diff, np.ones((diff.shape[0], 1))])
    lp = LpProblem(np.r_[np.zeros(J), -1.0], a_ub, np.zeros(diff.shape[0]),
                   np.r_[np.ones(J), 0.0][None, :], [1.0],
                   np.r_[np.zeros(J), -m], np.r_[np.full(J, np.inf), m])
    sol = lp_solve(lp)
    if sol.status is not LpStatus.OPTIMAL:
        return None, -math.inf
    return sol.x[:J], float(sol.x[J])


def _node_lp(model: IlpModel, lower, upper, active: np.ndarray, tol: float):
    """LP relaxation of one node, solved by adding big-M rows on demand.

    Starts from the rows in ``active`` and repeatedly appends, for every
    candidate with a violated row, its most violated row. The result is the
    optimum over all rows. Returns ``(solution, active_rows, iterations)``.
    """
    nc = model.num_binary
    iters = 0
    while True:
        lp = LpProblem(model.objective, model.a_ub[active], model.b_ub[active],
                       model.a_eq, model.b_eq, lower, upper)
        sol = lp_solve(lp)
        iters += sol.iterations
        if sol.status is not LpStatus.OPTIMAL:
            return sol, active, iters
        viol = (model.a_ub @ sol.x - model.b_ub).reshape(-1, nc)
        worst = viol.argmax(axis=0)
        cols = np.flatnonzero(viol[worst, np.arange(nc)] > tol)
        if cols.size == 0:
            return sol, active, iters
        active = np.union1d(active, worst[cols] * nc + cols)


def branch_and_bound(model: IlpModel, cfg: SolverConfig = SolverConfig(),
                     trace: Optional[Callable[[str], None]] = None) -> IlpSolution:
    """Solve the nomination program exactly by LP-based branch and bound.

    Every node's LP weights are turned into an incumbent by ranking, so the
    incumbent is always a true objective value. Node bounds are the ceiling
    of the LP value because the objective counts binaries.
    """
    start = time.perf_counter()
    J = model.num_alpha
    tie_abs = cfg.tie_tol * max(model.big_m, 1.0)
    base = relaxation(model)

    best = None
    for j in range(J):
        cand = _round_alpha(model, np.eye(J)[j], tie_abs)
        if best is None or cand[0] < best[0]:
            best = cand

    # rows binding at uniform weights: the worst S member for each candidate
    nc = model.num_binary
    fused0 = model.matrix.entries.mean(axis=1)
    worst_s = int(np.argmax(fused0[model.s_rows]))
    root_rows = worst_s * nc + np.arange(nc)

    heap = [_Node(0, 0, 0, base.lower.copy(), base.upper.copy(), root_rows)]
    seq = 1
    nodes = 0
    lp_iters = 0
    exhausted = True
    while heap:
        node = heapq.heappop(heap)
        if node.bound >= best[0]:
            # best-bound order: every remaining node is at least as bad
            heap.clear()
            break
        if nodes >= cfg.node_limit or time.perf_counter() - start > cfg.time_budget:
            exhausted = False
            break
        nodes += 1
        sol, rows, its = _node_lp(model, node.lower, node.upper, node.rows, 1e-9)
        lp_iters += its
        if sol.status is not LpStatus.OPTIMAL:
            if trace:
                trace(f"depth={-node.neg_depth} bound=inf incumbent={best[0]}")
            continue
        bound = max(node.bound, math.ceil(sol.objective - cfg.int_tol))
        cand = _round_alpha(model, sol.x[:J], tie_abs)
        if cand[0] < best[0]:
            best = cand
        if trace:
            trace(f"depth={-node.neg_depth} bound={bound} incumbent={best[0]}")
        if bound >= best[0]:
            continue
        xs = sol.x[J:]
        free = node.upper[J:] > node.lower[J:]
        frac = np.where(free, np.minimum(xs, 1.0 - xs), 0.0)
        v = int(np.argmax(frac))
        if frac[v] <= cfg.int_tol:
            # integral relaxation: the heuristic already realized this value
            continue
        down_hi = node.upper.copy()
        down_hi[J + v] = 0.0
        up_lo = node.lower.copy()
        up_lo[J + v] = 1.0
        depth = -node.neg_depth + 1
        heapq.heappush(heap, _Node(bound, -depth, seq, node.lower, down_hi, rows))
        heapq.heappush(heap, _Node(bound, -depth, seq + 1, up_lo, node.upper, rows))
        seq += 2

    value, alpha, x = best
    if cfg.polish:
        raw, margin = polish_alpha(model, x)
        if raw is not None and margin > tie_abs:
            cand = _round_alpha(model, raw, tie_abs)
            if cand[0] <= value:
                value, alpha, x = cand
    status = Status.OPTIMAL if exhausted else Status.ITERATION_LIMIT
    lower_bound = value if exhausted else min([value] + [n.bound for n in heap] + [node.bound])
    return IlpSolution(alpha=alpha, x=x, objective_value=value, status=status,
                       nodes=nodes, lp_iterations=lp_iters, lower_bound=int(lower_bound),
                       elapsed=time.perf_counter() - start)
