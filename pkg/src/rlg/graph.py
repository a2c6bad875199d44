"""Simple undirected graphs on ``{0, ..., n-1}`` and stochastic block models.

Vertex pairs ``{i, j}`` with ``i < j`` are indexed lexicographically, so the
pair index space of ``K_n`` is ``0 .. C(n, 2) - 1``.  Every matrix indexed by
edges in this package (line-graph adjacency, projections, embeddings) uses
that order.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np
import scipy.sparse as sp

from .seeding import make_rng


class InvalidPairError(ValueError):
    pass


def edge_index(i: int, j: int, n: int) -> int:
    """Canonical index of the pair ``{i, j}`` among all pairs of ``[n]``."""
    if not (0 <= i < n and 0 <= j < n) or i == j:
        raise InvalidPairError(f"invalid pair ({i}, {j}) for n={n}")
    if i > j:
        i, j = j, i
    return i * (2 * n - i - 1) // 2 + (j - i - 1)


def pair_of(index: int, n: int) -> tuple[int, int]:
    """Inverse of :func:`edge_index`."""
    total = comb(n, 2)
    if not 0 <= index < total:
        raise InvalidPairError(f"pair index {index} out of range for n={n}")
    # row i starts at i*(2n-i-1)/2; solve the quadratic then fix rounding
    i = int((2 * n - 1 - np.sqrt((2 * n - 1) ** 2 - 8 * index)) // 2)
    while i > 0 and i * (2 * n - i - 1) // 2 > index:
        i -= 1
    while (i + 1) * (2 * n - i - 2) // 2 <= index:
        i += 1
    j = index - i * (2 * n - i - 1) // 2 + i + 1
    return i, int(j)


def all_pairs(n: int) -> np.ndarray:
    """All pairs of ``[n]`` in canonical order, shape ``(C(n,2), 2)``."""
    i, j = np.triu_indices(n, k=1)
    return np.column_stack([i, j]).astype(np.int64)


def pair_indices(edges: np.ndarray, n: int) -> np.ndarray:
    """Vectorised :func:`edge_index` for an ``(m, 2)`` array with ``i < j``."""
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    i, j = edges[:, 0], edges[:, 1]
    return i * (2 * n - i - 1) // 2 + (j - i - 1)


@dataclass(frozen=True)
class Graph:
    """Immutable simple graph.

    ``edges`` is an ``(m, 2)`` int array of pairs ``i < j`` sorted
    lexicographically; ``present`` is a boolean indicator over all ``C(n,2)``
    canonical pair indices.
    """

    n: int
    edges: np.ndarray
    present: np.ndarray = field(repr=False)

    def __post_init__(self):
        edges = self.edges
        if edges.ndim != 2 or edges.shape[1] != 2:
            raise ValueError("edges must have shape (m, 2)")
        if len(edges) and (np.any(edges[:, 0] >= edges[:, 1]) or edges.min() < 0 or edges.max() >= self.n):
            raise ValueError("edges must satisfy 0 <= i < j < n")
        if self.present.shape != (comb(self.n, 2),):
            raise ValueError("presence indicator has wrong length")
        if int(self.present.sum()) != len(edges):
            raise ValueError("duplicate edges")
        edges.flags.writeable = False
        self.present.flags.writeable = False

    @classmethod
    def from_edges(cls, n: int, edges) -> "Graph":
        """Build from any iterable of pairs; order and orientation are normalised.

        Self-loops and duplicate pairs are rejected.
        """
        arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
        arr = arr.reshape(-1, 2)
        if np.any(arr[:, 0] == arr[:, 1]):
            raise ValueError("self-loops are not allowed")
        arr = np.sort(arr, axis=1)
        if len(arr) and (arr.min() < 0 or arr.max() >= n):
            raise ValueError("vertex out of range")
        idx = pair_indices(arr, n)
        if len(np.unique(idx)) != len(idx):
            raise ValueError("duplicate edges")
        present = np.zeros(comb(n, 2), dtype=bool)
        present[idx] = True
        return cls._from_present(n, present)

    @classmethod
    def _from_present(cls, n: int, present: np.ndarray) -> "Graph":
        edges = all_pairs(n)[present]
        return cls(n=n, edges=np.ascontiguousarray(edges), present=present)

    @classmethod
    def complete(cls, n: int) -> "Graph":
        return cls._from_present(n, np.ones(comb(n, 2), dtype=bool))

    @property
    def m(self) -> int:
        """Number of edges (the observed edge count)."""
        return len(self.edges)

    @property
    def edge_ids(self) -> np.ndarray:
        """Canonical pair indices of the present edges, increasing."""
        return np.flatnonzero(self.present)

    def has_edge(self, i: int, j: int) -> bool:
        return bool(self.present[edge_index(i, j, self.n)])

    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.n)

    def adjacency(self, sparse: bool = False):
        e = self.edges
        data = np.ones(2 * len(e))
        rows = np.concatenate([e[:, 0], e[:, 1]])
        cols = np.concatenate([e[:, 1], e[:, 0]])
        A = sp.csr_matrix((data, (rows, cols)), shape=(self.n, self.n))
        return A if sparse else A.toarray()

    def incidence(self, sparse: bool = True):
        """Incidence matrix, ``n x m``; column ``e`` marks both endpoints of edge ``e``."""
        return incidence_matrix(self, sparse=sparse)


def incidence_matrix(g: Graph, sparse: bool = True):
    m = g.m
    rows = g.edges.T.ravel()  # all first endpoints, then all second endpoints
    cols = np.tile(np.arange(m), 2)
    Bm = sp.csc_matrix((np.ones(2 * m), (rows, cols)), shape=(g.n, m))
    return Bm if sparse else Bm.toarray()


@dataclass(frozen=True)
class SbmModel:
    """Stochastic block model: vertex labels and a symmetric block matrix."""

    labels: np.ndarray
    block_matrix: np.ndarray

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        B = np.asarray(self.block_matrix, dtype=float)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "block_matrix", B)
        k = B.shape[0]
        if B.shape != (k, k) or not np.allclose(B, B.T, atol=0, rtol=0):
            raise ValueError("block matrix must be square and symmetric")
        if np.any(B < 0) or np.any(B > 1):
            raise ValueError("block probabilities must lie in [0, 1]")
        if labels.ndim != 1 or labels.min() < 0 or labels.max() >= k:
            raise ValueError("labels must be in 0..k-1")
        sizes = np.bincount(labels, minlength=k)
        if np.any(sizes < 2):
            raise ValueError("every cluster needs at least two vertices")
        labels.flags.writeable = False
        B.flags.writeable = False

    @classmethod
    def balanced(cls, sizes, block_matrix) -> "SbmModel":
        """Contiguous blocks of the given sizes (block 0 first)."""
        labels = np.repeat(np.arange(len(sizes)), sizes)
        return cls(labels, np.asarray(block_matrix, dtype=float))

    @classmethod
    def two_level(cls, sizes, p_in: float, p_out: float) -> "SbmModel":
        k = len(sizes)
        B = np.full((k, k), p_out)
        np.fill_diagonal(B, p_in)
        return cls.balanced(sizes, B)

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def k(self) -> int:
        return self.block_matrix.shape[0]

    @property
    def cluster_sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k)

    def membership(self) -> np.ndarray:
        """``n x k`` one-hot membership matrix."""
        Z = np.zeros((self.n, self.k))
        Z[np.arange(self.n), self.labels] = 1.0
        return Z

    def probability_matrix(self) -> np.ndarray:
        """``ZBZ^T`` with the diagonal left as is (self-pairs are never sampled)."""
        return self.block_matrix[np.ix_(self.labels, self.labels)]

    def pair_probabilities(self) -> np.ndarray:
        """Edge probability for every canonical pair, length ``C(n,2)``."""
        pairs = all_pairs(self.n)
        return self.block_matrix[self.labels[pairs[:, 0]], self.labels[pairs[:, 1]]]


def sample_sbm(model: SbmModel, seed) -> Graph:
    """Draw each pair independently with its block probability."""
    rng = make_rng(seed)
    probs = model.pair_probabilities()
    present = rng.random(len(probs)) < probs
    return Graph._from_present(model.n, present)


def sample_erdos_renyi(n: int, p: float, seed) -> Graph:
    rng = make_rng(seed)
    present = rng.random(comb(n, 2)) < p
    return Graph._from_present(n, present)
