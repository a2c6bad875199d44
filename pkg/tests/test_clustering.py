import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rlg.clustering import (
    adjacency_spectral_embedding,
    ari,
    ase_vertex_partition,
    default_centers,
    generate_edge_covariates,
    gmm_fit,
    match_clusters_to_blocks,
    scaled_embedding,
    scmase_fuse,
    vertex_voting,
)
from rlg.graph import Graph, SbmModel, sample_sbm
from rlg.partition import InducedEdgePartition


def blobs(seed, sep=10.0, n=100):
    rng = np.random.default_rng(seed)
    labels = np.repeat([0, 1], n)
    X = rng.standard_normal((2 * n, 2))
    X[labels == 1, 0] += sep
    return X, labels


def test_gmm_separated_blobs():
    X, labels = blobs(0)
    assert ari(gmm_fit(X, 2, 1).labels, labels) == 1.0


def test_gmm_single_component():
    X, _ = blobs(1)
    res = gmm_fit(X, 1, 0)
    assert np.all(res.labels == 0)


def test_gmm_duplicate_points():
    X = np.vstack([np.ones((20, 2)), np.zeros((20, 2))])
    res = gmm_fit(X, 2, 0)
    assert ari(res.labels, np.repeat([0, 1], 20)) == 1.0
    assert np.all(np.isfinite(res.covariances))


def test_gmm_too_few_rows():
    with pytest.raises(ValueError):
        gmm_fit(np.zeros((2, 2)), 3, 0)


def test_gmm_loglik_nondecreasing():
    rng = np.random.default_rng(3)
    X = np.vstack([rng.standard_normal((150, 3)) + c for c in ([0, 0, 0], [2, 0, 0], [0, 2.5, 0])])
    res = gmm_fit(X, 3, 4, n_init=1)
    hist = np.array(res.history)
    assert np.all(np.diff(hist) >= -1e-8 * np.abs(hist[:-1]))


def test_gmm_deterministic():
    X, _ = blobs(5, sep=3)
    a, b = gmm_fit(X, 2, 11), gmm_fit(X, 2, 11)
    assert np.array_equal(a.labels, b.labels) and a.log_likelihood == b.log_likelihood


def test_ari_examples():
    x = np.array([0, 0, 1, 1, 2])
    assert ari(x, x) == 1.0
    assert ari(x, np.array([2, 2, 0, 0, 1])) == 1.0
    assert ari([0, 0, 1, 1], [0, 1, 0, 1]) == pytest.approx(-0.5)
    with pytest.raises(ValueError):
        ari([0, 1], [0, 1, 1])


@given(st.lists(st.integers(0, 3), min_size=2, max_size=30), st.integers(0, 2**32))
@settings(max_examples=50, deadline=None)
def test_ari_symmetric_and_permutation_invariant(a, seed):
    a = np.array(a)
    b = np.random.default_rng(seed).integers(0, 3, len(a))
    assert ari(a, b) == pytest.approx(ari(b, a))
    perm = np.random.default_rng(seed).permutation(4)
    assert ari(perm[a], b) == pytest.approx(ari(a, b))


def test_covariates():
    model = SbmModel.two_level([30, 30, 30], 0.5, 0.2)
    part = InducedEdgePartition.from_model(model)
    g = sample_sbm(model, 1)
    centers = default_centers(3)
    exact = generate_edge_covariates(part, g, centers, 0.0, 5)
    assert exact.values.shape[0] == g.m
    assert np.array_equal(exact.values, centers[part.edge_blocks(g)])
    sigma = 0.7
    noisy = generate_edge_covariates(part, g, centers, sigma, 5)
    blocks = part.edge_blocks(g)
    for c in range(part.n_blocks):
        rows = noisy.values[blocks == c]
        assert np.all(np.abs(rows.mean(0) - centers[c]) <= 4 * sigma / np.sqrt(len(rows)))
    with pytest.raises(ValueError):
        generate_edge_covariates(part, g, centers[:3], 0.1, 0)


def test_default_centers_distinct():
    C = default_centers(3)
    assert C.shape == (6, 3)
    d = np.linalg.norm(C[:, None] - C[None], axis=-1)
    assert d[~np.eye(6, dtype=bool)].min() > 0.5


def test_ase_two_cliques():
    edges = [(i, j) for i in range(6) for j in range(i + 1, 6)] + [(i, j) for i in range(6, 12) for j in range(i + 1, 12)]
    g = Graph.from_edges(12, edges)
    labels = ase_vertex_partition(g, 2, 2, 0)
    assert ari(labels, np.repeat([0, 1], 6)) == 1.0
    assert np.all(ase_vertex_partition(g, 2, 1, 0) == 0)
    assert adjacency_spectral_embedding(g, 2).shape == (12, 2)


@pytest.mark.slow
def test_ase_baseline_on_three_blocks():
    model = SbmModel.two_level([50, 50, 50], 0.5, 0.2)
    good = sum(
        ari(ase_vertex_partition(sample_sbm(model, 700 + s), 3, 3, s), model.labels) >= 0.8
        for s in range(20)
    )
    assert good >= 18


def test_scmase_single_source():
    X = np.random.default_rng(0).standard_normal((40, 5))
    U, _, _ = np.linalg.svd(X, full_matrices=False)
    fused = scmase_fuse([(X, 1.0)], 3)
    assert np.allclose(np.abs(fused.T @ U[:, :3]), np.eye(3), atol=1e-10)
    assert np.allclose(fused.T @ fused, np.eye(3), atol=1e-12)


def test_scmase_zero_weight_limit():
    rng = np.random.default_rng(1)
    X, C = rng.standard_normal((50, 4)), rng.standard_normal((50, 3))
    fused = scmase_fuse([(X, 1.0), (C, 0.0)], 3)
    U, _, _ = np.linalg.svd(X, full_matrices=False)
    s = np.linalg.svd(fused.T @ U[:, :3], compute_uv=False)
    assert np.allclose(s, 1, atol=1e-10)


def test_scmase_errors():
    with pytest.raises(ValueError):
        scmase_fuse([(np.ones((5, 2)), 1.0), (np.ones((6, 2)), 1.0)], 2)
    with pytest.raises(ValueError):
        scmase_fuse([], 2)


def test_scaled_embedding():
    X = np.random.default_rng(2).standard_normal((30, 4))
    E = scaled_embedding(X, 2)
    U, s, _ = np.linalg.svd(X, full_matrices=False)
    assert np.allclose(np.abs(E), np.abs(U[:, :2] * s[:2]))


def test_covariate_only_noise_free_and_monotone():
    model = SbmModel.two_level([20, 20, 20], 0.5, 0.2)
    part = InducedEdgePartition.from_model(model)
    g = sample_sbm(model, 0)
    truth = part.edge_blocks(g)
    centers = default_centers(3)
    fit = gmm_fit(scaled_embedding(generate_edge_covariates(part, g, centers, 0.0, 0).values, 3), 6, 0)
    assert ari(fit.labels, truth) == 1.0
    means = []
    for sigma in (0.1, 0.4, 1.5):
        scores = []
        for s in range(4):
            cov = generate_edge_covariates(part, g, centers, sigma, 100 + s).values
            scores.append(ari(gmm_fit(scaled_embedding(cov, 3), 6, s, n_init=2).labels, truth))
        means.append(np.mean(scores))
    assert means[0] >= means[1] >= means[2]


def test_match_clusters_to_blocks():
    ref = np.array([0, 0, 1, 1, 2, 2])
    got = match_clusters_to_blocks(np.array([2, 2, 0, 0, 1, 1]), ref, 3)
    assert np.array_equal(got, ref)


def test_vertex_voting_recovers_partition_k9():
    labels = np.repeat([0, 1, 2], 3)
    g = Graph.complete(9)
    part = InducedEdgePartition(labels)
    voted, isolated = vertex_voting(part.edge_blocks(g), g, 3)
    assert np.array_equal(voted, labels) and len(isolated) == 0


def test_vertex_voting_single_cluster():
    g = Graph.complete(5)
    voted, _ = vertex_voting(np.zeros(g.m, dtype=int), g, 1)
    assert np.all(voted == 0)


def test_vertex_voting_robust_to_one_error():
    labels = np.repeat([0, 1, 2], 4)
    g = Graph.complete(12)
    part = InducedEdgePartition(labels)
    blocks = part.edge_blocks(g)
    for e in np.flatnonzero(blocks == 0):
        wrong = blocks.copy()
        for c in range(1, part.n_blocks):
            wrong[e] = c
            voted, _ = vertex_voting(wrong, g, 3)
            assert np.array_equal(voted, labels)


def test_vertex_voting_isolated():
    g = Graph.from_edges(4, [(0, 1)])
    voted, isolated = vertex_voting(np.array([0]), g, 2)
    assert list(isolated) == [2, 3]
