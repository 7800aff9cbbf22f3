"""Random dot product graphs and their adjacency / Laplacian spectral
embeddings.

Eigendecompositions use a cyclic Jacobi method in round-robin ordering:
each round applies ``n/2`` disjoint plane rotations at once, so a sweep
is ``n - 1`` vectorized rounds. Intended for ``n <= 2000``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .core import PersonalDissimilarityMatrix, ingest_matrix

GENERATOR_NAME = "numpy.random.PCG64"
MAX_JACOBI_N = 2000


def make_rng(*keys: int) -> np.random.Generator:
    """PCG64 generator keyed by integers, e.g. ``(seed, replicate)``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(k) for k in keys])))


@dataclass(frozen=True, eq=False)
class LatentPositions:
    X: np.ndarray

    def __post_init__(self):
        X = np.array(self.X, dtype=float)
        if X.ndim != 2:
            raise ValueError("latent positions must be an n x m matrix")
        # nonnegative rows inside the unit ball pass by Cauchy-Schwarz
        if not (X.min(initial=0.0) >= 0 and (X ** 2).sum(axis=1).max(initial=0.0) <= 1 + 1e-12):
            for start in range(0, X.shape[0], 1024):
                G = X[start:start + 1024] @ X.T
                if G.min() < -1e-12 or G.max() > 1 + 1e-12:
                    raise ValueError("latent inner products must lie in [0, 1]")
        X.setflags(write=False)
        object.__setattr__(self, "X", X)


@dataclass(frozen=True, eq=False)
class ProbabilityMatrix:
    P: np.ndarray

    def __post_init__(self):
        P = np.array(self.P, dtype=float)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise ValueError("probability matrix must be square")
        if not np.allclose(P, P.T, atol=1e-12):
            raise ValueError("probability matrix must be symmetric")
        if P.min() < -1e-12 or P.max() > 1 + 1e-12:
            raise ValueError("probabilities must lie in [0, 1]")
        P.setflags(write=False)
        object.__setattr__(self, "P", P)


@dataclass(frozen=True, eq=False)
class AveragedAdjacency:
    A_bar: np.ndarray
    k: int


@dataclass(frozen=True, eq=False)
class Embedding:
    Y: np.ndarray
    kind: str
    eigenvalues: np.ndarray

    @property
    def dim(self) -> int:
        return self.Y.shape[1]


def sample_latents(n: int, rng=None) -> LatentPositions:
    """Row 0 is (0.5, 0.5); the rest are uniform on the positive quarter
    of the unit disk, drawn by rejection from the unit square."""
    if n < 2:
        raise ValueError("need at least two vertices")
    if rng is None or isinstance(rng, (int, np.integer)):
        rng = make_rng(0 if rng is None else rng)
    X = np.empty((n, 2))
    X[0] = 0.5
    filled = 1
    while filled < n:
        pts = rng.uniform(size=(2 * (n - filled) + 8, 2))
        pts = pts[(pts ** 2).sum(axis=1) <= 1.0][: n - filled]
        X[filled:filled + len(pts)] = pts
        filled += len(pts)
    return LatentPositions(X)


def probability_matrix(latents: LatentPositions) -> ProbabilityMatrix:
    X = latents.X
    P = X @ X.T
    # exact symmetry; the product can differ in the last bit
    P = (P + P.T) / 2
    return ProbabilityMatrix(np.clip(P, 0.0, 1.0))


def sample_average_adjacency(P: ProbabilityMatrix, k: int, rng) -> AveragedAdjacency:
    """Average of ``k`` independent symmetric, hollow Bernoulli(P) graphs.

    Each upper-triangle entry of the sum is a Binomial(k, P_ij) draw, which
    has the same law as summing ``k`` Bernoulli draws.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    probs = P.P
    n = probs.shape[0]
    iu = np.triu_indices(n, 1)
    counts = rng.binomial(k, probs[iu])
    A = np.zeros((n, n))
    A[iu] = counts / k
    A = A + A.T
    return AveragedAdjacency(A, k)


def _round_robin(n: int):
    """Pairings for a round-robin tournament on n (even) players."""
    players = list(range(n))
    for _ in range(n - 1):
        yield players[: n // 2], players[n // 2:][::-1]
        players = [players[0], players[-1]] + players[1:-1]


def symmetric_eigh(M, tol: float = 1e-15, max_sweeps: int = 60) -> Tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and orthonormal eigenvectors of a symmetric
    matrix by cyclic Jacobi rotations.
    """
    A = np.array(M, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix must be square")
    if not np.allclose(A, A.T, rtol=0, atol=1e-12 * max(1.0, np.abs(A).max(initial=0.0))):
        raise ValueError("matrix must be symmetric")
    n = A.shape[0]
    if n > MAX_JACOBI_N:
        raise ValueError(f"Jacobi eigensolver limited to n <= {MAX_JACOBI_N}")
    A = (A + A.T) / 2
    V = np.eye(n)
    if n == 1:
        return A.diagonal().copy(), V
    size = n + (n % 2)
    rounds = []
    for top, bottom in _round_robin(size):
        p = np.array(top)
        q = np.array(bottom)
        keep = (p < n) & (q < n)
        p, q = p[keep], q[keep]
        lo, hi = np.minimum(p, q), np.maximum(p, q)
        rounds.append((lo, hi))

    scale = max(np.abs(A).max(), np.finfo(float).tiny)
    for _ in range(max_sweeps):
        off = np.abs(A - np.diag(A.diagonal())).max()
        if off <= tol * scale:
            break
        for p, q in rounds:
            apq = A[p, q]
            active = np.abs(apq) > tol * scale * 1e-3
            if not active.any():
                continue
            p, q, apq = p[active], q[active], apq[active]
            theta = (A[q, q] - A[p, p]) / (2.0 * apq)
            t = np.sign(theta) / (np.abs(theta) + np.sqrt(1.0 + theta * theta))
            t[theta == 0] = 1.0
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            Ap, Aq = A[:, p], A[:, q]
            A[:, p] = Ap * c - Aq * s
            A[:, q] = Ap * s + Aq * c
            Ap, Aq = A[p, :], A[q, :]
            A[p, :] = c[:, None] * Ap - s[:, None] * Aq
            A[q, :] = s[:, None] * Ap + c[:, None] * Aq
            Vp, Vq = V[:, p], V[:, q]
            V[:, p] = Vp * c - Vq * s
            V[:, q] = Vp * s + Vq * c
        A = (A + A.T) / 2
    else:
        raise RuntimeError("Jacobi iteration did not converge")
    vals = A.diagonal().copy()
    order = np.argsort(-vals, kind="stable")
    return vals[order], V[:, order]


def _top_by_magnitude(M, m_embed: int):
    n = M.shape[0]
    if not 1 <= m_embed <= n:
        raise ValueError(f"embedding dimension must be in [1, {n}], got {m_embed}")
    vals, vecs = symmetric_eigh(M)
    order = np.argsort(-np.abs(vals), kind="stable")[:m_embed]
    return vals[order], vecs[:, order]


def ase(M, m_embed: int) -> Embedding:
    """Adjacency spectral embedding ``U |L|^(1/2)`` over the ``m_embed``
    eigenvalues of largest magnitude."""
    M = np.asarray(M, dtype=float)
    vals, vecs = _top_by_magnitude(M, m_embed)
    return Embedding(vecs * np.sqrt(np.abs(vals)), "ASE", vals)


def laplacian(M) -> np.ndarray:
    """``D^(-1/2) M D^(-1/2)`` with ``D`` the row sums of ``M``."""
    M = np.asarray(M, dtype=float)
    deg = M.sum(axis=1)
    bad = np.flatnonzero(deg <= 0)
    if bad.size:
        raise ValueError(f"vertex {bad[0]} has nonpositive row sum {deg[bad[0]]!r}")
    inv = 1.0 / np.sqrt(deg)
    L = inv[:, None] * M * inv[None, :]
    return (L + L.T) / 2


def lse(M, m_embed: int) -> Embedding:
    """Laplacian spectral embedding ``sqrt(n) U |L|^(1/2)`` of the
    normalized matrix ``D^(-1/2) M D^(-1/2)``."""
    L = laplacian(M)
    vals, vecs = _top_by_magnitude(L, m_embed)
    n = L.shape[0]
    return Embedding(np.sqrt(n) * vecs * np.sqrt(np.abs(vals)), "LSE", vals)


def personal_dissimilarity(embeddings: Sequence[Embedding], query_row: int = 0,
                           labels=None) -> PersonalDissimilarityMatrix:
    """Euclidean distance from ``query_row`` to every other vertex, one
    column per embedding. The query's own row is dropped."""
    if not embeddings:
        raise ValueError("need at least one embedding")
    n = embeddings[0].Y.shape[0]
    if any(e.Y.shape[0] != n for e in embeddings):
        raise ValueError("embeddings must cover the same vertices")
    if not 0 <= query_row < n:
        raise ValueError(f"query row {query_row} out of range")
    others = np.delete(np.arange(n), query_row)
    cols = [np.linalg.norm(e.Y[others] - e.Y[query_row], axis=1) for e in embeddings]
    return ingest_matrix(np.column_stack(cols), labels)
