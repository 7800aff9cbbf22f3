"""Brute-force reference solvers for checking the ILP pipeline.

These never touch the LP machinery; they evaluate the ranking objective
directly at enough weight vectors to be exact (J = 2) or to give a
one-sided bound (any J).
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np

from .core import PersonalDissimilarityMatrix, SupervisionInstance
from .ranking import count_beating_worst


def _exact_integers(values) -> list:
    """Scale floats by a common power of two so every value is an exact int."""
    fracs = [Fraction(float(v)) for v in values]
    den = max(f.denominator for f in fracs)
    return [int(f * den) for f in fracs]


def breakpoint_oracle_j2(matrix: PersonalDissimilarityMatrix, inst: SupervisionInstance) -> int:
    """Exact optimum of the nomination program for two representations.

    With weights ``(a, 1 - a)`` every fused value is affine in ``a``, so the
    objective is piecewise constant with breakpoints where two items cross.
    The objective is evaluated in exact rational arithmetic at 0, 1, every
    crossing in [0, 1] and every midpoint between consecutive crossings.
    Candidates tying the worst S value are not counted.
    """
    if matrix.n_reps != 2:
        raise ValueError("breakpoint oracle needs exactly two representations")
    ints = _exact_integers(matrix.entries.reshape(-1))
    d1 = ints[0::2]
    d2 = ints[1::2]
    n = len(d1)
    slope = [a - b for a, b in zip(d1, d2)]

    points = {(0, 1), (1, 1)}
    for u, v in itertools.combinations(range(n), 2):
        den = slope[u] - slope[v]
        if den == 0:
            continue
        num = d2[v] - d2[u]
        if den < 0:
            num, den = -num, -den
        if 0 <= num <= den:
            f = Fraction(num, den)
            points.add((f.numerator, f.denominator))
    crossings = sorted(Fraction(p, q) for p, q in points)
    for lo, hi in zip(crossings, crossings[1:]):
        mid = (lo + hi) / 2
        points.add((mid.numerator, mid.denominator))

    s_rows = sorted(inst.s_set)
    c_rows = sorted(inst.candidate_set)
    best = len(c_rows)
    for p, q in points:
        # q * fused value, exact
        vals = [d2[i] * q + p * slope[i] for i in range(n)]
        worst = max(vals[s] for s in s_rows)
        count = sum(1 for v in c_rows if vals[v] < worst)
        if count < best:
            best = count
            if best == 0:
                break
    return best


def simplex_lattice(size: int, resolution: int) -> np.ndarray:
    """All weight vectors with entries ``k / resolution`` summing to one."""
    pts = []
    for cut in itertools.combinations(range(resolution + size - 1), size - 1):
        bounds = (-1,) + cut + (resolution + size - 1,)
        pts.append([bounds[i + 1] - bounds[i] - 1 for i in range(size)])
    return np.array(pts, dtype=float) / resolution


def grid_oracle(matrix: PersonalDissimilarityMatrix, inst: SupervisionInstance,
                resolution: int) -> int:
    """Best objective over a simplex lattice: an upper bound on the optimum."""
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    if matrix.n_reps == 1:
        return count_beating_worst(matrix.column(0), inst)
    lattice = simplex_lattice(matrix.n_reps, resolution)
    fused = lattice @ matrix.entries.T
    worst = fused[:, inst.s_rows].max(axis=1)
    counts = (fused[:, inst.candidate_rows] < worst[:, None]).sum(axis=1)
    return int(counts.min())
