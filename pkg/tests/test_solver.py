import math
import time

import numpy as np
import pytest

from ilpnom.core import SupervisionInstance, ingest_matrix
from ilpnom.ilp import Status, build_model, solve
from ilpnom.oracle import breakpoint_oracle_j2
from ilpnom.solver import LpProblem, LpStatus, SolverConfig, branch_and_bound, lp_solve, relaxation

from conftest import random_instance

scipy_opt = pytest.importorskip("scipy.optimize")


def test_one_dimensional_lp():
    p = LpProblem([1.0], np.zeros((0, 1)), [], np.zeros((0, 1)), [], [3.0], [10.0])
    sol = lp_solve(p)
    assert sol.status is LpStatus.OPTIMAL and sol.x.tolist() == [3.0]


def test_degenerate_objective_returns_simplex_vertex():
    p = LpProblem(np.zeros(3), np.zeros((0, 3)), [], np.ones((1, 3)), [1.0],
                  np.zeros(3), np.full(3, np.inf))
    sol = lp_solve(p)
    assert sol.status is LpStatus.OPTIMAL
    assert sol.x.sum() == pytest.approx(1.0)
    assert sorted(np.round(sol.x, 12).tolist()) == [0.0, 0.0, 1.0]


def test_infeasible_and_unbounded():
    inf = LpProblem([1.0, 1.0], np.zeros((0, 2)), [], [[1.0, 1.0]], [3.0], [0, 0], [1, 1])
    assert lp_solve(inf).status is LpStatus.INFEASIBLE
    unb = LpProblem([-1.0, 0.0], [[1.0, -1.0]], [0.0], np.zeros((0, 2)), [], [0, 0], [np.inf, np.inf])
    assert lp_solve(unb).status is LpStatus.UNBOUNDED


def test_lp_solve_matches_linprog():
    rng = np.random.default_rng(1)
    for _ in range(60):
        n, m_ub, m_eq = int(rng.integers(2, 9)), int(rng.integers(1, 8)), int(rng.integers(0, 3))
        c = rng.normal(size=n)
        a_ub = rng.normal(size=(m_ub, n))
        a_eq = rng.normal(size=(m_eq, n))
        x0 = rng.uniform(0, 1, size=n)
        b_ub = a_ub @ x0 + rng.uniform(0, 1, size=m_ub)
        b_eq = a_eq @ x0
        upper = np.where(rng.uniform(size=n) < 0.5, 2.0, np.inf)
        ref = scipy_opt.linprog(c, a_ub, b_ub, a_eq if m_eq else None, b_eq if m_eq else None,
                                bounds=list(zip(np.zeros(n), upper)), method="highs")
        got = lp_solve(LpProblem(c, a_ub, b_ub, a_eq, b_eq, np.zeros(n), upper))
        # x0 is feasible by construction, so a HiGHS presolve verdict of
        # "infeasible or unbounded" (status 2) can only mean unbounded
        if ref.status in (2, 3):
            assert got.status is LpStatus.UNBOUNDED
            continue
        assert got.status is LpStatus.OPTIMAL
        assert got.objective == pytest.approx(ref.fun, abs=1e-7, rel=1e-7)
        assert np.all(a_ub @ got.x <= b_ub + 1e-7)


def test_relaxation_matches_linprog_and_bounds_optimum():
    rng = np.random.default_rng(2)
    for _ in range(20):
        m, inst = random_instance(rng, 25, 3, 4)
        model = build_model(m, inst)
        lp = lp_solve(relaxation(model))
        ref = scipy_opt.linprog(model.objective, model.a_ub, model.b_ub, model.a_eq, model.b_eq,
                                bounds=list(zip(model.lower, model.upper)), method="highs")
        assert lp.objective == pytest.approx(ref.fun, abs=1e-7)
        assert lp.objective <= solve(model).objective_value + 1e-9


def test_relaxation_of_example_is_lower_bound(example_j2):
    m, inst = example_j2
    lp = lp_solve(relaxation(build_model(m, inst)))
    assert lp.objective <= 0 + 1e-12


def test_integral_relaxation_needs_no_branching():
    # candidates all strictly worse than S under every column
    m = ingest_matrix([[0.1, 0.2], [0.2, 0.1], [0.8, 0.9], [0.9, 0.8]])
    model = build_model(m, SupervisionInstance(4, frozenset({0, 1})))
    lp = lp_solve(relaxation(model))
    assert np.allclose(lp.x[2:], np.round(lp.x[2:]))
    lines = []
    sol = branch_and_bound(model, SolverConfig(), trace=lines.append)
    assert sol.objective_value == 0 and sol.nodes <= 1
    assert all(line.startswith("depth=0 ") for line in lines)


def test_ceiling_bound_never_prunes_optimum():
    rng = np.random.default_rng(3)
    for _ in range(40):
        m, inst = random_instance(rng, int(rng.integers(10, 31)), 2, int(rng.integers(1, 6)))
        sol = solve(build_model(m, inst))
        assert sol.status is Status.OPTIMAL
        assert sol.objective_value == breakpoint_oracle_j2(m, inst)
        assert sol.lower_bound == sol.objective_value


def test_deterministic_solutions():
    rng = np.random.default_rng(4)
    m, inst = random_instance(rng, 40, 4, 5)
    a = solve(build_model(m, inst))
    b = solve(build_model(m, inst))
    assert a.alpha.alpha.tobytes() == b.alpha.alpha.tobytes()
    assert a.x.tobytes() == b.x.tobytes() and a.nodes == b.nodes


def test_trace_lines():
    rng = np.random.default_rng(5)
    m, inst = random_instance(rng, 30, 3, 4)
    lines = []
    sol = branch_and_bound(build_model(m, inst), SolverConfig(), trace=lines.append)
    assert len(lines) == sol.nodes
    assert all(line.startswith("depth=") and "bound=" in line and "incumbent=" in line
               for line in lines)


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(node_limit=0)
    with pytest.raises(ValueError):
        SolverConfig(branching="Random")


def test_time_budget_limit():
    rng = np.random.default_rng(6)
    m, inst = random_instance(rng, 150, 4, 10)
    start = time.perf_counter()
    sol = solve(build_model(m, inst), SolverConfig(time_budget=0.5))
    assert time.perf_counter() - start < 30
    assert sol.status is Status.ITERATION_LIMIT
    assert sol.lower_bound <= sol.objective_value


def planted_instance(seed, n_items=200, n_reps=4, s_size=10, pool=20):
    """S drawn from the items nearest under a hidden weighting."""
    rng = np.random.default_rng(seed)
    raw = rng.uniform(size=(n_items, n_reps))
    w = rng.dirichlet(np.ones(n_reps))
    near = np.argsort(raw @ w, kind="stable")[:pool]
    s = rng.choice(near, s_size, replace=False)
    return ingest_matrix(raw), SupervisionInstance(n_items, frozenset(int(v) for v in s))


@pytest.mark.slow
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_engineering_target_planted(seed):
    m, inst = planted_instance(seed)
    sol = solve(build_model(m, inst), SolverConfig(node_limit=100_000))
    assert sol.status is Status.OPTIMAL
    assert sol.nodes <= 100_000
    assert math.isclose(sol.lower_bound, sol.objective_value)
