import math

import numpy as np
import pytest

from ilpnom import spectral
from ilpnom.spectral import (
    LatentPositions,
    ProbabilityMatrix,
    ase,
    laplacian,
    lse,
    make_rng,
    personal_dissimilarity,
    probability_matrix,
    sample_average_adjacency,
    sample_latents,
    symmetric_eigh,
)


def procrustes_residual(Y, X):
    u, _, vt = np.linalg.svd(Y.T @ X)
    return np.linalg.norm(Y @ (u @ vt) - X)


def test_latents_support_and_query_row():
    X = sample_latents(2000, make_rng(1)).X
    assert X[0].tolist() == [0.5, 0.5]
    assert np.all(X >= 0) and np.all((X ** 2).sum(axis=1) <= 1.0)


def test_latent_mean_is_quarter_disk_centroid():
    X = sample_latents(100_001, make_rng(2)).X[1:]
    np.testing.assert_allclose(X.mean(axis=0), 4 / (3 * math.pi), atol=0.01)


def test_latents_seeded_determinism():
    a = sample_latents(50, make_rng(7, 3)).X
    b = sample_latents(50, make_rng(7, 3)).X
    c = sample_latents(50, make_rng(7, 4)).X
    assert a.tobytes() == b.tobytes() and a.tobytes() != c.tobytes()


def test_latent_validation():
    with pytest.raises(ValueError):
        LatentPositions(np.array([[1.0, 1.0], [0.0, 0.0]]))


def test_probability_matrix():
    P = probability_matrix(LatentPositions(np.array([[0.5, 0.5], [1.0, 0.0]]))).P
    assert P[0, 1] == 0.5
    X = sample_latents(200, make_rng(3))
    P = probability_matrix(X).P
    np.testing.assert_array_equal(P, P.T)
    assert P.min() >= 0 and P.max() <= 1
    np.testing.assert_allclose(np.diag(P), (X.X ** 2).sum(axis=1))
    assert np.linalg.eigvalsh(P).min() > -1e-10


def test_probability_matrix_validation():
    with pytest.raises(ValueError):
        ProbabilityMatrix(np.array([[0.0, 0.2], [0.3, 0.0]]))


def test_average_adjacency_all_ones():
    P = ProbabilityMatrix(np.ones((6, 6)))
    A = sample_average_adjacency(P, 5, make_rng(0))
    off = ~np.eye(6, dtype=bool)
    assert np.all(A.A_bar[off] == 1.0) and np.all(np.diag(A.A_bar) == 0)


def test_average_adjacency_structure_and_concentration():
    P = probability_matrix(sample_latents(80, make_rng(4)))
    k = 1000
    A = sample_average_adjacency(P, k, make_rng(5)).A_bar
    np.testing.assert_array_equal(A, A.T)
    assert np.all(np.diag(A) == 0)
    np.testing.assert_allclose(A * k, np.round(A * k), atol=1e-9)
    iu = np.triu_indices(80, 1)
    p = P.P[iu]
    within = np.abs(A[iu] - p) <= 5 * np.sqrt(p * (1 - p) / k) + 1e-12
    assert within.mean() >= 0.99
    with pytest.raises(ValueError):
        sample_average_adjacency(P, 0, make_rng(0))


def test_bernoulli_sum_law_matches_binomial_route():
    # the binomial shortcut and an explicit average of k Bernoulli graphs agree in mean and variance
    P = ProbabilityMatrix(np.full((4, 4), 0.3) - np.diag(np.full(4, 0.3)) + np.diag(np.full(4, 0.3)))
    rng = make_rng(6)
    k, reps = 20, 4000
    fast = np.array([sample_average_adjacency(P, k, rng).A_bar[0, 1] for _ in range(reps)])
    slow = (rng.uniform(size=(reps, k)) < 0.3).mean(axis=1)
    assert abs(fast.mean() - slow.mean()) < 0.01
    assert abs(fast.var() - slow.var()) < 0.002


def test_eigh_small_cases():
    vals, vecs = symmetric_eigh(np.array([[0.5, 0.25], [0.25, 0.5]]))
    np.testing.assert_allclose(vals, [0.75, 0.25], atol=1e-15)
    vals, vecs = symmetric_eigh(np.eye(5))
    np.testing.assert_array_equal(vals, np.ones(5))
    np.testing.assert_allclose(vecs.T @ vecs, np.eye(5), atol=1e-15)


@pytest.mark.parametrize("n", [1, 2, 3, 7, 20, 33])
def test_eigh_reconstruction_and_orthonormality(n):
    rng = make_rng(10, n)
    B = rng.normal(size=(n, n))
    M = (B + B.T) / 2
    vals, V = symmetric_eigh(M)
    assert np.max(np.abs(V @ np.diag(vals) @ V.T - M)) < 1e-8
    assert np.max(np.abs(V.T @ V - np.eye(n))) < 1e-8
    assert np.max(np.abs(M @ V - V * vals)) < 1e-8
    assert np.all(np.diff(vals) <= 0)
    np.testing.assert_allclose(vals, np.sort(np.linalg.eigvalsh(M))[::-1], atol=1e-10)


def test_eigh_rejects_asymmetric():
    with pytest.raises(ValueError):
        symmetric_eigh(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_ase_rank_one():
    x = np.array([0.6, 0.8])
    Y = ase(np.outer(x, x), 1).Y[:, 0]
    assert min(np.abs(Y - x).max(), np.abs(Y + x).max()) < 1e-12


def test_ase_recovers_latents():
    X = sample_latents(60, make_rng(11))
    emb = ase(probability_matrix(X).P, 2)
    assert emb.dim == 2 and emb.kind == "ASE"
    assert procrustes_residual(emb.Y, X.X) < 1e-6


def test_full_ase_reconstructs_psd():
    X = sample_latents(12, make_rng(12))
    P = probability_matrix(X).P
    Y = ase(P, 12).Y
    assert np.abs(Y @ Y.T - P).max() < 1e-8


def test_ase_columns_ordered_by_magnitude():
    M = np.diag([0.1, -3.0, 2.0])
    emb = ase(M, 3)
    np.testing.assert_allclose(emb.eigenvalues, [-3.0, 2.0, 0.1])


def test_lse_constant_matrix():
    P = np.full((7, 7), 0.4)
    vals, _ = symmetric_eigh(laplacian(P))
    assert vals[0] == pytest.approx(1.0, abs=1e-12)
    Y = lse(P, 1).Y
    assert np.ptp(Y) < 1e-12


def test_laplacian_spectrum_in_unit_interval():
    P = probability_matrix(sample_latents(40, make_rng(13))).P
    vals, _ = symmetric_eigh(laplacian(P))
    assert vals.max() <= 1 + 1e-12 and vals.min() >= -1 - 1e-12


def test_lse_rejects_isolated_vertex():
    A = np.ones((4, 4)) - np.eye(4)
    A[2, :] = A[:, 2] = 0
    with pytest.raises(ValueError, match="vertex 2"):
        lse(A, 2)


def test_lse_and_ase_order_vertices_differently():
    X = sample_latents(51, make_rng(0, 0))
    P = probability_matrix(X).P
    d = personal_dissimilarity([ase(P, 2), lse(P, 2)], 0)
    a = np.argsort(d.column(0), kind="stable")
    b = np.argsort(d.column(1), kind="stable")
    assert not np.array_equal(a, b)


def test_personal_dissimilarity():
    e = spectral.Embedding(np.array([[0.0], [3.0], [4.0]]), "ASE", np.array([1.0]))
    m = personal_dissimilarity([e], 0)
    np.testing.assert_array_equal(m.column(0), [3.0, 4.0])
    m2 = personal_dissimilarity([e, e], 0)
    np.testing.assert_array_equal(m2.column(0), m2.column(1))


def test_personal_dissimilarity_matches_direct():
    P = probability_matrix(sample_latents(30, make_rng(14))).P
    embs = [ase(P, 2), lse(P, 2)]
    m = personal_dissimilarity(embs, 0)
    for j, e in enumerate(embs):
        direct = [math.dist(e.Y[i], e.Y[0]) for i in range(1, 30)]
        np.testing.assert_allclose(m.column(j), direct, rtol=1e-13)
