from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rlg.graph import Graph, SbmModel, all_pairs, sample_sbm
from rlg.line_graph import complete_line_adjacency, mean_line_matrix
from rlg.partition import (
    InducedEdgePartition,
    block_pairs,
    build_M,
    build_Q,
    build_Qhat,
    canonical_labels,
    closed_form_factor,
    eta_count,
    is_refinement,
    m_spectrum,
    mean_decomposition,
    normalisation_weights,
    refinement_residual,
    signal_basis_F,
)


def labels_from_sizes(sizes):
    return np.repeat(np.arange(len(sizes)), sizes)


@st.composite
def partitions(draw, max_n=40, max_k=5):
    k = draw(st.integers(1, max_k))
    sizes = [draw(st.integers(2, max(2, max_n // k))) for _ in range(k)]
    labels = labels_from_sizes(sizes)
    perm = np.random.default_rng(draw(st.integers(0, 2**32))).permutation(len(labels))
    return InducedEdgePartition(canonical_labels(labels[perm]))


def test_block_order():
    assert block_pairs(3) == [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)]


def test_partition_validation():
    with pytest.raises(ValueError):
        InducedEdgePartition(np.array([0, 0, 1]))
    with pytest.raises(ValueError):
        InducedEdgePartition(np.array([0, 0, 2, 2]))


def test_Q_single_block():
    Q = build_Q(InducedEdgePartition(np.zeros(6, dtype=int)))
    assert Q.shape == (15, 1)
    assert np.allclose(Q, 1 / np.sqrt(15))


def test_Q_small_example():
    part = InducedEdgePartition(np.array([0, 0, 1, 1]))
    Q = build_Q(part)
    assert Q.shape == (6, 3)
    assert Q[0, 0] == 1.0  # edge {0,1} is the only member of block (0,0)


@given(partitions())
@settings(max_examples=50, deadline=None)
def test_Q_isometry(part):
    Q = build_Q(part)
    assert np.abs(Q.T @ Q - np.eye(part.n_blocks)).max() <= 1e-14


def test_M_small_example():
    part = InducedEdgePartition(np.array([0, 0, 1, 1]))
    M = build_M(part)
    assert np.allclose(M, [[0, 0, 2], [0, 0, 2], [2, 2, 2]])
    assert np.allclose(np.sort(np.linalg.eigvalsh(M)), [-2, 0, 4])


def test_M_entry_diag_offdiag():
    part = InducedEdgePartition(labels_from_sizes([5, 7]))
    M = build_M(part)
    assert M[0, 2] == pytest.approx(np.sqrt(2 * 7 * (5 - 1)))


def test_M_closed_form_matches_dense():
    part = InducedEdgePartition(labels_from_sizes([3, 4, 5]))
    Q = build_Q(part)
    dense = Q.T @ complete_line_adjacency(12) @ Q
    assert np.abs(dense - build_M(part)).max() <= 1e-12


@given(partitions())
@settings(max_examples=50, deadline=None)
def test_M_spectrum(part):
    w = np.sort(np.linalg.eigvalsh(build_M(part)))[::-1]
    assert np.allclose(w, m_spectrum(part.n, part.k), atol=1e-8)


def test_F_single_block():
    part = InducedEdgePartition(np.zeros(5, dtype=int))
    basis = signal_basis_F(build_M(part))
    assert basis.F.shape == (1, 1)
    assert abs(basis.F[0, 0]) == pytest.approx(1.0)


def test_F_rank_and_nullity():
    part = InducedEdgePartition(labels_from_sizes([50, 50, 50]))
    M2 = build_M(part) + 2 * np.eye(6)
    assert np.linalg.matrix_rank(M2) == 3
    basis = signal_basis_F(build_M(part))
    assert basis.F.shape == (6, 3)
    assert np.allclose(basis.F.T @ basis.F, np.eye(3), atol=1e-12)
    assert np.allclose(basis.F * basis.eigenvalues @ basis.F.T, M2, atol=1e-9)


def test_F_factor_geometry():
    part = InducedEdgePartition(labels_from_sizes([400, 400]))
    basis = signal_basis_F(build_M(part))
    c = basis.corners
    assert np.allclose(np.abs(c[0]), [1, 0], atol=1e-9)
    assert np.allclose(np.abs(c[1]), [0, 1], atol=1e-9)
    assert np.allclose(np.abs(c[2]), [1 / np.sqrt(2), 1 / np.sqrt(2)], atol=1e-9)
    # the rotated factor equals the closed form up to column signs
    assert np.allclose(np.abs(basis.factor), closed_form_factor(part), atol=1e-8)


@given(partitions(max_n=20, max_k=4))
@settings(max_examples=30, deadline=None)
def test_closed_form_factor_gram(part):
    G = closed_form_factor(part)
    assert np.allclose(G @ G.T, build_M(part) + 2 * np.eye(part.n_blocks), atol=1e-10)


def test_refinement():
    truth = labels_from_sizes([4, 4])
    assert is_refinement(truth, truth)
    assert is_refinement(np.arange(8), truth)
    merged = np.zeros(8, dtype=int)
    assert not is_refinement(merged, truth)
    model = SbmModel.balanced([4, 4], np.array([[0.7, 0.2], [0.2, 0.4]]))
    assert refinement_residual(truth, model) <= 1e-12
    assert refinement_residual(labels_from_sizes([2, 2, 2, 2]), model) <= 1e-12
    assert refinement_residual(merged, model) > 0.1


def test_mean_decomposition_homogeneous():
    p = 0.4
    model = SbmModel.two_level([7], p, p)
    T1, T2 = mean_decomposition(model)
    assert np.allclose(T1 + T2, p**2 * complete_line_adjacency(7))
    assert np.linalg.matrix_rank(T1, tol=1e-9) <= 3


def test_mean_decomposition_two_blocks():
    B = np.array([[0.8, 0.3], [0.3, 0.5]])
    model = SbmModel.balanced([5, 5], B)
    T1, T2 = mean_decomposition(model)
    P = np.diag(model.pair_probabilities())
    assert np.linalg.norm(T1 + T2 - P @ complete_line_adjacency(10) @ P) <= 1e-10
    assert np.linalg.norm(T1 + T2 - mean_line_matrix(model).to_dense()) <= 1e-10
    part = InducedEdgePartition.from_model(model)
    blk = part.pair_block
    for a in range(part.n_blocks):
        for b in range(part.n_blocks):
            sub = T2[np.ix_(blk == a, blk == b)]
            assert np.allclose(sub.sum(1), 0, atol=1e-10)
            assert np.allclose(sub.sum(0), 0, atol=1e-10)


def test_Qhat_complete_graph():
    part = InducedEdgePartition(labels_from_sizes([3, 4]))
    Qhat, Qbar = build_Qhat(Graph.complete(7), part)
    assert np.allclose(Qhat, build_Q(part))
    assert np.allclose(Qbar, build_Q(part))


def test_Qhat_empty_block_column():
    part = InducedEdgePartition(labels_from_sizes([3, 3]))
    g = Graph.from_edges(6, [(0, 1), (3, 4), (1, 2)])  # no cross edges
    Qhat, _ = build_Qhat(g, part)
    assert np.all(Qhat[:, 2] == 0)
    assert np.allclose(np.linalg.norm(Qhat[:, :2], axis=0), 1)


def test_Qhat_properties_on_sbm():
    model = SbmModel.two_level([10, 12, 9], 0.5, 0.2)
    part = InducedEdgePartition.from_model(model)
    for seed in range(5):
        g = sample_sbm(model, seed)
        Qhat, Qbar = build_Qhat(g, part)
        norms = np.linalg.norm(Qhat, axis=0)
        assert np.all(np.abs(norms[norms > 0] - 1) <= 1e-14)
        nz = norms > 0
        assert np.allclose(Qbar[:, nz].T @ Qbar[:, nz], np.eye(nz.sum()), atol=1e-12)
        Q = build_Q(part)
        P = np.diag(g.present.astype(float))
        assert np.abs((P - Qbar @ Qbar.T) @ Q).max() <= 1e-12
        Y = normalisation_weights(g, part)
        D = Q.T @ (Y[:, None] * Q)
        mhat = part.observed_sizes(g)
        assert np.allclose(D, np.diag(np.sqrt(mhat / part.block_sizes)), atol=1e-12)


def brute_eta(edge, block, part):
    r, s = block
    count = 0
    for l, p in combinations(range(part.n), 2):
        if tuple(sorted((part.labels[l], part.labels[p]))) == (r, s) and len({l, p} & set(edge)) == 1:
            count += 1
    return count


def test_eta_table_examples():
    part = InducedEdgePartition(labels_from_sizes([4, 5, 3]))
    nr = part.cluster_sizes
    assert eta_count((0, 4), (0, 1), part) == nr[0] + nr[1] - 2
    assert eta_count((0, 4), (0, 0), part) == nr[0] - 1


def test_eta_matches_brute_force():
    rng = np.random.default_rng(9)
    for sizes in ([4, 5, 3], [2, 6, 4], [5, 5, 5]):
        labels = canonical_labels(rng.permutation(labels_from_sizes(sizes)))
        part = InducedEdgePartition(labels)
        for e in all_pairs(part.n):
            for blk in part.blocks:
                assert eta_count(tuple(e), blk, part) == brute_eta(tuple(e), blk, part)
