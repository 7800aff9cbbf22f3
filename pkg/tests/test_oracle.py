import numpy as np
import pytest

from ilpnom.core import SupervisionInstance, WeightVector, ingest_matrix
from ilpnom.ilp import build_model, solve
from ilpnom.oracle import breakpoint_oracle_j2, grid_oracle, simplex_lattice
from ilpnom.ranking import count_beating_worst, fuse

from conftest import random_instance


def test_example_oracle_value(example_j2):
    m, inst = example_j2
    assert breakpoint_oracle_j2(m, inst) == 0
    fused = fuse(m, WeightVector(np.array([0.5, 0.5])))
    np.testing.assert_allclose(fused, [0.5, 0.65, 0.65, 0.9])


def test_identical_columns():
    rng = np.random.default_rng(0)
    col = rng.uniform(size=10)
    m = ingest_matrix(np.column_stack([col, col]))
    inst = SupervisionInstance(10, frozenset({2, 5}))
    assert breakpoint_oracle_j2(m, inst) == count_beating_worst(col, inst)


def test_one_candidate_binary_outcome():
    rng = np.random.default_rng(1)
    for _ in range(30):
        raw = rng.uniform(size=(6, 2))
        m = ingest_matrix(raw)
        inst = SupervisionInstance(6, frozenset(range(1, 6)))
        value = breakpoint_oracle_j2(m, inst)
        assert value in (0, 1)
        # direct check over a fine sweep plus the three anchor points
        direct = min(count_beating_worst(raw @ np.array([a, 1 - a]), inst)
                     for a in [0.0, 0.5, 1.0] + list(np.linspace(0, 1, 2001)))
        assert value <= direct


def test_oracle_exact_on_near_tie():
    # candidate ties the S item at a = 1/3 only; midpoints must not see it beat S
    raw = np.array([[0.5, 0.2], [0.8, 0.05]])
    m = ingest_matrix(raw)
    inst = SupervisionInstance(2, frozenset({0}))
    assert breakpoint_oracle_j2(m, inst) == 0


def test_oracle_rejects_wrong_width():
    with pytest.raises(ValueError):
        breakpoint_oracle_j2(ingest_matrix(np.ones((3, 3))), SupervisionInstance(3, frozenset({0})))


def test_lattice_sizes():
    assert simplex_lattice(2, 2).tolist() == [[0.0, 1.0], [0.5, 0.5], [1.0, 0.0]]
    lat = simplex_lattice(3, 50)
    assert len(lat) == 51 * 52 // 2
    np.testing.assert_allclose(lat.sum(axis=1), 1.0)


def test_grid_single_representation():
    m = ingest_matrix([[0.3], [0.1], [0.5]])
    inst = SupervisionInstance(3, frozenset({0}))
    assert grid_oracle(m, inst, 10) == 1 == count_beating_worst(m.column(0), inst)
    with pytest.raises(ValueError):
        grid_oracle(m, inst, 1)


def test_grid_resolution_two_is_corners_and_midpoint():
    rng = np.random.default_rng(2)
    m, inst = random_instance(rng, 12, 2, 3)
    expected = min(count_beating_worst(m.entries @ np.array(a), inst)
                   for a in [(0, 1), (0.5, 0.5), (1, 0)])
    assert grid_oracle(m, inst, 2) == expected


def test_grid_non_increasing_under_refinement():
    rng = np.random.default_rng(3)
    for _ in range(20):
        m, inst = random_instance(rng, 15, 3, 3)
        values = [grid_oracle(m, inst, r) for r in (2, 4, 8, 16, 32)]
        assert values == sorted(values, reverse=True)


def test_grid_upper_bounds_ilp_j3():
    rng = np.random.default_rng(4)
    for _ in range(15):
        m, inst = random_instance(rng, 18, 3, 3)
        assert solve(build_model(m, inst)).objective_value <= grid_oracle(m, inst, 50)


def test_breakpoint_oracle_against_exhaustive_rational_sweep():
    # integer data in [0, 8]: every crossing is p/q with q <= 16, so the grid
    # k / lcm(1..16) contains every crossing and a point inside every cell
    lcm = 720720
    k = np.arange(lcm + 1, dtype=np.int64)
    rng = np.random.default_rng(5)
    for _ in range(20):
        ints = rng.integers(0, 9, size=(8, 2)).astype(np.int64)
        m = ingest_matrix(ints.astype(float))
        inst = SupervisionInstance(8, frozenset(rng.choice(8, 2, replace=False).tolist()))
        vals = ints[:, :1] * k[None, :] + ints[:, 1:] * (lcm - k)[None, :]
        worst = vals[inst.s_rows].max(axis=0)
        counts = (vals[inst.candidate_rows] < worst).sum(axis=0)
        assert breakpoint_oracle_j2(m, inst) == counts.min()
