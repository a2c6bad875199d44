"""Induced edge partitions and the block projections built on them.

For a vertex partition ``C_1..C_k`` the pairs of ``[n]`` split into blocks
``(r, s)``, ``r <= s``.  Block columns are ordered ``(0,0), (1,1), ...,
(k-1,k-1)`` followed by the off-diagonal blocks ``(0,1), (0,2), ...`` in
lexicographic order.  With this order ``M + 2I`` has the block form
``[[D, X], [X^T, X^T D^-1 X]]``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from math import comb

import numpy as np
import scipy.linalg

from .graph import Graph, SbmModel, all_pairs
from .line_graph import DEFAULT_SIZE_GUARD, LineOperator, SizeGuardError, complete_line_adjacency


def block_pairs(k: int) -> list[tuple[int, int]]:
    """Block labels in column order."""
    diag = [(r, r) for r in range(k)]
    off = [(r, s) for r in range(k) for s in range(r + 1, k)]
    return diag + off


def block_column_table(k: int) -> np.ndarray:
    """``k x k`` symmetric table mapping ``(r, s)`` to its column."""
    table = np.empty((k, k), dtype=np.int64)
    for c, (r, s) in enumerate(block_pairs(k)):
        table[r, s] = table[s, r] = c
    return table


def canonical_labels(labels) -> np.ndarray:
    """Relabel to ``0..k-1`` in order of first appearance."""
    labels = np.asarray(labels)
    _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
    order = np.argsort(first)
    remap = np.empty_like(order)
    remap[order] = np.arange(len(order))
    return remap[inverse].astype(np.int64)


@dataclass(frozen=True, eq=False)
class InducedEdgePartition:
    """Edge blocks induced by vertex labels (labels must be ``0..k-1``, all used)."""

    labels: np.ndarray

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        object.__setattr__(self, "labels", labels)
        if labels.ndim != 1 or len(labels) < 2:
            raise ValueError("labels must be a 1-d array with at least two vertices")
        k = int(labels.max()) + 1
        sizes = np.bincount(labels, minlength=k)
        if labels.min() < 0 or np.any(sizes == 0):
            raise ValueError("labels must cover 0..k-1")
        if np.any(sizes < 2):
            raise ValueError("every cluster needs at least two vertices")

    @classmethod
    def from_model(cls, model: SbmModel) -> "InducedEdgePartition":
        return cls(model.labels)

    @property
    def n(self) -> int:
        return len(self.labels)

    @cached_property
    def k(self) -> int:
        return int(self.labels.max()) + 1

    @cached_property
    def cluster_sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k)

    @property
    def n_blocks(self) -> int:
        return comb(self.k + 1, 2)

    @cached_property
    def blocks(self) -> list[tuple[int, int]]:
        return block_pairs(self.k)

    @cached_property
    def column_table(self) -> np.ndarray:
        return block_column_table(self.k)

    @cached_property
    def block_sizes(self) -> np.ndarray:
        """``m_{r,s}`` per column: ``C(n_r, 2)`` on the diagonal, ``n_r n_s`` off it."""
        nr = self.cluster_sizes
        return np.array([comb(int(nr[r]), 2) if r == s else int(nr[r] * nr[s]) for r, s in self.blocks], dtype=np.int64)

    def block_of_pairs(self, pairs: np.ndarray) -> np.ndarray:
        pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        return self.column_table[self.labels[pairs[:, 0]], self.labels[pairs[:, 1]]]

    @cached_property
    def pair_block(self) -> np.ndarray:
        """Column index for every canonical pair of ``[n]``."""
        return self.block_of_pairs(all_pairs(self.n))

    def edge_blocks(self, g: Graph) -> np.ndarray:
        """Column index of each present edge of ``g``."""
        self._check_graph(g)
        return self.block_of_pairs(g.edges)

    def observed_sizes(self, g: Graph) -> np.ndarray:
        """``m-hat_{r,s}``: present edges per block."""
        return np.bincount(self.edge_blocks(g), minlength=self.n_blocks)

    def _check_graph(self, g: Graph) -> None:
        if g.n != self.n:
            raise ValueError(f"partition has {self.n} vertices, graph has {g.n}")

    def block_values(self, B) -> np.ndarray:
        """Per-column values ``B_{r,s}`` of a symmetric ``k x k`` matrix."""
        B = np.asarray(B)
        return np.array([B[r, s] for r, s in self.blocks], dtype=float)


def build_Q(part: InducedEdgePartition) -> np.ndarray:
    """Block-indicator isometry, ``C(n,2) x C(k+1,2)``, entries ``m_{r,s}^{-1/2}``."""
    rows = np.arange(comb(part.n, 2))
    Q = np.zeros((len(rows), part.n_blocks))
    cols = part.pair_block
    Q[rows, cols] = 1.0 / np.sqrt(part.block_sizes[cols])
    return Q


def build_M(part: InducedEdgePartition) -> np.ndarray:
    """Closed form of ``Q^T A(L(K_n)) Q``."""
    nr = part.cluster_sizes.astype(float)
    blocks = part.blocks
    M = np.zeros((len(blocks), len(blocks)))
    for a, (i, j) in enumerate(blocks):
        for b, (l, p) in enumerate(blocks):
            if i == j and l == p:
                M[a, b] = 2 * (nr[i] - 2) if i == l else 0.0
            elif i == j or l == p:
                # one diagonal block (r, r) against an off-diagonal block containing r
                r = i if i == j else l
                other = (l, p) if i == j else (i, j)
                if r in other:
                    s = other[0] if other[1] == r else other[1]
                    M[a, b] = np.sqrt(2 * nr[s] * (nr[r] - 1))
            else:
                shared = {i, j} & {l, p}
                if len(shared) == 2:
                    M[a, b] = nr[i] + nr[j] - 2
                elif len(shared) == 1:
                    s, t = sorted({i, j} ^ {l, p})
                    M[a, b] = np.sqrt(nr[s] * nr[t])
    return M


def m_spectrum(n: int, k: int) -> np.ndarray:
    """Expected eigenvalues of ``M``, nonincreasing."""
    vals = [2.0 * n - 4] + [n - 4.0] * (k - 1) + [-2.0] * comb(k, 2)
    return np.sort(np.array(vals))[::-1]


@dataclass(frozen=True)
class SignalBasis:
    """Nonzero eigenspace of ``M + 2I``.

    ``F`` has orthonormal columns with ``M + 2I = F diag(eigenvalues) F^T``.
    ``factor`` is the rotated square-root factor ``F diag(eigenvalues)^{1/2} O``
    whose diagonal-block rows are positive multiples of ``e_i``; ``corners``
    are its rows scaled to unit length.
    """

    F: np.ndarray
    eigenvalues: np.ndarray
    factor: np.ndarray

    @property
    def corners(self) -> np.ndarray:
        return self.factor / np.linalg.norm(self.factor, axis=1, keepdims=True)


def signal_basis_F(M: np.ndarray, k: int | None = None, rtol: float = 1e-9) -> SignalBasis:
    size = M.shape[0]
    if k is None:
        # C(k+1, 2) = size
        k = int(round((np.sqrt(8 * size + 1) - 1) / 2))
    if comb(k + 1, 2) != size:
        raise ValueError("M is not of order C(k+1, 2)")
    w, V = np.linalg.eigh(M + 2.0 * np.eye(size))
    keep = w > rtol * max(abs(w).max(), 1.0)
    if keep.sum() != k:
        raise ValueError(f"rank of M + 2I is {int(keep.sum())}, expected {k}")
    w, V = w[keep][::-1], V[:, keep][:, ::-1]
    root = V * np.sqrt(w)
    # polar factor of the diagonal-block rows rotates them onto the axes
    U_polar, _ = scipy.linalg.polar(root[:k], side="left")
    factor = root @ U_polar.T
    factor[np.abs(factor) < 1e-13 * np.abs(factor).max()] = 0.0
    return SignalBasis(F=V, eigenvalues=w, factor=factor)


def closed_form_factor(part: InducedEdgePartition) -> np.ndarray:
    """``[D^{1/2}; X^T D^{-1/2}]``: row ``(i,i)`` is ``sqrt(2n_i - 2) e_i``,
    row ``(i,j)`` is ``sqrt(n_j) e_i + sqrt(n_i) e_j``."""
    nr = part.cluster_sizes.astype(float)
    G = np.zeros((part.n_blocks, part.k))
    for c, (i, j) in enumerate(part.blocks):
        if i == j:
            G[c, i] = np.sqrt(2 * nr[i] - 2)
        else:
            G[c, i] = np.sqrt(nr[j])
            G[c, j] = np.sqrt(nr[i])
    return G


def is_refinement(candidate, truth) -> bool:
    """True iff every candidate cluster sits inside one truth cluster."""
    candidate = np.asarray(candidate)
    truth = np.asarray(truth)
    if candidate.shape != truth.shape:
        raise ValueError("partitions cover different vertex sets")
    for c in np.unique(candidate):
        if len(np.unique(truth[candidate == c])) > 1:
            return False
    return True


def refinement_residual(candidate, model: SbmModel) -> float:
    """``min_D ||E[P] Q~ - Q~ D||_F`` over diagonal ``D`` (zero for refinements)."""
    part = InducedEdgePartition(canonical_labels(candidate))
    if part.n != model.n:
        raise ValueError("candidate partition has the wrong number of vertices")
    Qt = build_Q(part)
    EPQ = model.pair_probabilities()[:, None] * Qt
    D = np.sum(Qt * EPQ, axis=0)  # Q~ has orthonormal columns
    return float(np.linalg.norm(EPQ - Qt * D))


def mean_decomposition(model: SbmModel, part: InducedEdgePartition | None = None,
                       size_guard: int = DEFAULT_SIZE_GUARD) -> tuple[np.ndarray, np.ndarray]:
    """``(T1, T2)`` with ``T1 = Q diag(B) M diag(B) Q^T`` and ``T1 + T2`` the line-graph mean."""
    part = part or InducedEdgePartition.from_model(model)
    size = comb(model.n, 2)
    if size > size_guard:
        raise SizeGuardError("mean decomposition is dense; reduce n")
    Q = build_Q(part)
    b = part.block_values(model.block_matrix)
    core = b[:, None] * build_M(part) * b[None, :]
    T1 = Q @ core @ Q.T
    p = model.pair_probabilities()
    mean = p[:, None] * complete_line_adjacency(model.n) * p[None, :]
    return T1, mean - T1


def normalisation_weights(g: Graph, part: InducedEdgePartition) -> np.ndarray:
    """``Y_e = delta_e sqrt(m_e / m-hat_e)`` for every canonical pair."""
    m = part.block_sizes.astype(float)
    mhat = part.observed_sizes(g).astype(float)
    scale = np.where(mhat > 0, np.sqrt(m / np.maximum(mhat, 1)), 1.0)
    return g.present * scale[part.pair_block]


def build_Qhat(g: Graph, part: InducedEdgePartition) -> tuple[np.ndarray, np.ndarray]:
    """``(Q-hat, padded Q-hat)``; rows of Q-hat are the present edges in order."""
    Qbar = normalisation_weights(g, part)[:, None] * build_Q(part)
    return Qbar[g.present], Qbar


def eta_count(edge: tuple[int, int], block: tuple[int, int], part: InducedEdgePartition) -> int:
    """Pairs of block ``block`` sharing exactly one endpoint with ``edge``."""
    r, s = sorted(block)
    nr = part.cluster_sizes
    a, b = sorted((int(part.labels[edge[0]]), int(part.labels[edge[1]])))
    if r == s:
        if a == b == r:
            return int(2 * (nr[r] - 2))
        if (a == r) != (b == r):
            return int(nr[r] - 1)
        return 0
    if a == b == r:
        return int(2 * nr[s])
    if a == b == s:
        return int(2 * nr[r])
    if (a, b) == (r, s):
        return int(nr[r] + nr[s] - 2)
    if r in (a, b):
        return int(nr[s])
    if s in (a, b):
        return int(nr[r])
    return 0


def padded_complete_operator(n: int) -> LineOperator:
    return LineOperator(Graph.complete(n))
