"""Edge latent-position estimation."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import orthogonal_procrustes

from .damped_binomial import exact_mu
from .graph import Graph, SbmModel
from .line_graph import LineOperator
from .partition import (
    InducedEdgePartition,
    build_M,
    build_Q,
    build_Qhat,
    closed_form_factor,
)
from .spectral import partial_svd


@dataclass(frozen=True)
class EmbeddingResult:
    edges: np.ndarray  # rows of `positions`; all canonical pairs in padded mode
    positions: np.ndarray
    singular_values: np.ndarray
    mode: str  # "projected" | "naive" | "padded"

    @property
    def dim(self) -> int:
        return self.positions.shape[1]

    def scaled(self) -> np.ndarray:
        return self.positions * self.singular_values[: self.dim]

    def columns(self, which) -> np.ndarray:
        return self.positions[:, list(which)]


def _top_left(Mtx: np.ndarray, k: int, mode: str, edges) -> EmbeddingResult:
    U, s, _ = np.linalg.svd(Mtx, full_matrices=False)
    if k > len(s) or s[k - 1] <= 1e-12 * max(s[0], 1e-300):
        raise ValueError(f"fewer than {k} nonzero singular values")
    return EmbeddingResult(edges=edges, positions=U[:, :k], singular_values=s, mode=mode)


def projected_matrix(g: Graph, part: InducedEdgePartition) -> np.ndarray:
    """``A(L(G)) Q-hat`` computed through the incidence operator."""
    Qhat, _ = build_Qhat(g, part)
    return LineOperator(g).apply(Qhat)


def estimate_edge_positions(g: Graph, part: InducedEdgePartition, k: int | None = None) -> EmbeddingResult:
    """Top-``k`` left singular vectors of ``A(L(G)) Q-hat``; rows follow ``g.edges``."""
    k = part.k if k is None else k
    if k > part.n_blocks:
        raise ValueError("k exceeds the number of induced blocks")
    return _top_left(projected_matrix(g, part), k, "projected", g.edges)


def naive_line_embedding(g: Graph, d: int, method: str = "incidence", seed=0) -> EmbeddingResult:
    """Top-``d`` left singular vectors of ``A(L(G))`` itself.

    ``incidence`` uses the eigenpairs of ``B B^T = A(G) + D``: the right
    singular vectors of ``B`` are eigenvectors of ``A(L(G))`` with eigenvalue
    ``s^2 - 2``.  ``iterative`` runs :func:`partial_svd` on the line operator.
    """
    if d < 1 or d > g.m:
        raise ValueError(f"d={d} must lie in 1..{g.m}")
    if method == "iterative":
        U, s, _ = partial_svd(LineOperator(g), d, tol=1e-9, seed=seed)
        return EmbeddingResult(g.edges, U, s, "naive")
    if method != "incidence":
        raise ValueError(f"unknown method {method!r}")
    B = g.incidence(sparse=True)
    w, W = np.linalg.eigh((B @ B.T).toarray())
    order = np.argsort(-w, kind="stable")
    w, W = w[order], W[:, order]
    line_vals = w - 2.0
    # every other eigenvalue of A(L(G)) has modulus 2, so the top d are these
    if d > len(w) or line_vals[d - 1] < 2.0:
        return naive_line_embedding(g, d, method="iterative", seed=seed)
    s = np.sqrt(np.maximum(w[:d], 0))
    V = (B.T @ W[:, :d]) / s
    return EmbeddingResult(g.edges, np.asarray(V), line_vals[: max(d, 1)], "naive")


def block_means(model: SbmModel, part: InducedEdgePartition | None = None) -> np.ndarray:
    """Exact ``mu_{r,s} = E[Y_e]`` per block column."""
    part = part or InducedEdgePartition.from_model(model)
    b = part.block_values(model.block_matrix)
    return np.array([exact_mu(float(p), int(m)) for p, m in zip(b, part.block_sizes)])


@dataclass(frozen=True)
class TheoreticalPositions:
    blocks: list  # (r, s) per row of `vectors`
    vectors: np.ndarray  # C(k+1,2) x k
    mu: np.ndarray

    def for_edges(self, edge_blocks) -> np.ndarray:
        return self.vectors[np.asarray(edge_blocks)]


def theoretical_positions(model: SbmModel) -> TheoreticalPositions:
    """``(2 mu_ii / sqrt(n_i)) e_i`` for diagonal blocks, ``mu_ij (e_i/sqrt(n_i) + e_j/sqrt(n_j))`` otherwise."""
    part = InducedEdgePartition.from_model(model)
    mu = block_means(model, part)
    nr = part.cluster_sizes.astype(float)
    vecs = np.zeros((part.n_blocks, part.k))
    for c, (i, j) in enumerate(part.blocks):
        if i == j:
            vecs[c, i] = 2 * mu[c] / np.sqrt(nr[i])
        else:
            vecs[c, i] = mu[c] / np.sqrt(nr[i])
            vecs[c, j] = mu[c] / np.sqrt(nr[j])
    return TheoreticalPositions(blocks=part.blocks, vectors=vecs, mu=mu)


def latent_position_matrix(model: SbmModel) -> np.ndarray:
    """``Q diag(mu) F D^{1/2}`` over all canonical pairs, with the axis-aligned factor."""
    part = InducedEdgePartition.from_model(model)
    mu = block_means(model, part)
    return build_Q(part) @ (mu[:, None] * closed_form_factor(part))


def reference_subspace(g: Graph, part: InducedEdgePartition, mu: np.ndarray, k: int | None = None) -> np.ndarray:
    """Top-``k`` left singular vectors of ``Q-hat diag(mu) M diag(mu)``."""
    k = part.k if k is None else k
    Qhat, _ = build_Qhat(g, part)
    core = mu[:, None] * build_M(part) * mu[None, :]
    U, _, _ = np.linalg.svd(Qhat @ core, full_matrices=False)
    return U[:, :k]


def padded_embedding(g: Graph, part: InducedEdgePartition, k: int | None = None) -> EmbeddingResult:
    """Top-``k`` left singular vectors of ``A(L(K_n)) Q-bar``, one row per canonical pair."""
    k = part.k if k is None else k
    _, Qbar = build_Qhat(g, part)
    full = LineOperator(Graph.complete(g.n))
    return _top_left(full.apply(Qbar), k, "padded", full.graph.edges)


def padded_reference(part: InducedEdgePartition, mu: np.ndarray, k: int | None = None) -> np.ndarray:
    """Top-``k`` left singular vectors of ``Q M diag(mu)``."""
    k = part.k if k is None else k
    U, _, _ = np.linalg.svd(build_Q(part) @ (build_M(part) * mu[None, :]), full_matrices=False)
    return U[:, :k]


def procrustes_align(X, Y) -> tuple[np.ndarray, float]:
    """Orthogonal ``O`` minimising ``||X - Y O||_F`` and the attained residual."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.shape != Y.shape:
        raise ValueError(f"shape mismatch {X.shape} vs {Y.shape}")
    O, _ = orthogonal_procrustes(Y, X)
    return O, float(np.linalg.norm(X - Y @ O))


def subspace_distance(X, Y) -> float:
    """Spectral norm of ``sin Theta`` between the column spaces of orthonormal ``X`` and ``Y``."""
    Qx, _ = np.linalg.qr(X)
    Qy, _ = np.linalg.qr(Y)
    # residual form keeps precision for nearly equal subspaces, unlike sqrt(1 - cos^2)
    return float(np.linalg.norm(Qy - Qx @ (Qx.T @ Qy), 2))


def noise_matrix(g: Graph, part: InducedEdgePartition, mu: np.ndarray) -> np.ndarray:
    """``H = A(L(K_n)) (Q-bar - Q diag(mu))``."""
    _, Qbar = build_Qhat(g, part)
    full = LineOperator(Graph.complete(g.n))
    return full.apply(Qbar - build_Q(part) * mu[None, :])


def core_residual(g: Graph, part: InducedEdgePartition, mu: np.ndarray) -> float:
    """``||Q-hat^T A(L(G)) Q-hat - diag(mu) M diag(mu)||_F``."""
    Qhat, _ = build_Qhat(g, part)
    core = Qhat.T @ LineOperator(g).apply(Qhat)
    return float(np.linalg.norm(core - mu[:, None] * build_M(part) * mu[None, :]))
