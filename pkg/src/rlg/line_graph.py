"""Line graphs and the incidence-operator form ``A(L(G)) = B^T B - 2I``."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator

from .graph import Graph, SbmModel, incidence_matrix

DEFAULT_SIZE_GUARD = 5000


class SizeGuardError(RuntimeError):
    """Raised when a dense line-graph matrix would exceed the size guard."""


class LineOperator(LinearOperator):
    """``X -> B^T (B X) - 2X`` for the incidence matrix ``B`` of a graph.

    Rows of ``X`` follow the graph's edge order.  Cost is ``O(nnz(B) * cols)``.
    """

    def __init__(self, g: Graph):
        self.graph = g
        self.B = incidence_matrix(g).tocsr()
        self.Bt = self.B.T.tocsr()
        super().__init__(dtype=np.float64, shape=(g.m, g.m))

    def apply(self, X):
        X = np.asarray(X, dtype=float)
        if X.shape[0] != self.shape[0]:
            raise ValueError(f"expected {self.shape[0]} rows, got {X.shape[0]}")
        return self.Bt @ (self.B @ X) - 2.0 * X

    def _matvec(self, x):
        return self.apply(x)

    def _matmat(self, X):
        return self.apply(X)

    def _rmatvec(self, x):
        return self.apply(x)

    def _adjoint(self):
        return self

    def to_dense(self) -> np.ndarray:
        A = (self.Bt @ self.B).toarray()
        A -= 2.0 * np.eye(self.shape[0])
        return A


@dataclass(frozen=True)
class LineGraph:
    """Line graph of ``base``; its vertices are ``base.edges`` in order."""

    base: Graph
    size_guard: int = DEFAULT_SIZE_GUARD

    @property
    def vertex_edges(self) -> np.ndarray:
        return self.base.edges

    @property
    def order(self) -> int:
        return self.base.m

    @property
    def operator(self) -> LineOperator:
        return LineOperator(self.base)

    def adjacency(self, sparse: bool = False):
        """Adjacency of ``L(G)``; the dense form is refused above the size guard."""
        B = incidence_matrix(self.base)
        A = (B.T @ B).tocsr()
        A.setdiag(0)
        A.eliminate_zeros()
        if sparse:
            return A
        if self.order > self.size_guard:
            raise SizeGuardError(
                f"dense line graph of order {self.order} exceeds guard {self.size_guard}; use .operator"
            )
        return A.toarray()


def build_line_graph(g: Graph, size_guard: int = DEFAULT_SIZE_GUARD) -> LineGraph:
    return LineGraph(g, size_guard)


def line_operator_apply(op: LineOperator, X) -> np.ndarray:
    return op.apply(X)


def complete_line_adjacency(n: int) -> np.ndarray:
    """Dense ``A(L(K_n))`` in canonical pair order (small ``n`` only)."""
    return LineOperator(Graph.complete(n)).to_dense()


@dataclass(frozen=True)
class MeanLineMatrix:
    """``E[P] A(L(K_n)) E[P]`` for an SBM, where ``E[P] = diag(P_ij)``.

    Entries are never stored; use :meth:`entry`, :meth:`matmat` or
    :meth:`to_dense` (guarded).
    """

    model: SbmModel
    size_guard: int = DEFAULT_SIZE_GUARD

    @property
    def probs(self) -> np.ndarray:
        return self.model.pair_probabilities()

    @property
    def shape(self) -> tuple[int, int]:
        size = len(self.probs)
        return size, size

    def entry(self, pair_a: tuple[int, int], pair_b: tuple[int, int]) -> float:
        a, b = set(pair_a), set(pair_b)
        if len(a & b) != 1:
            return 0.0
        P = self.model.block_matrix
        lab = self.model.labels
        i, j = pair_a
        r, s = pair_b
        return float(P[lab[i], lab[j]] * P[lab[r], lab[s]])

    def matmat(self, X) -> np.ndarray:
        p = self.probs
        X = np.asarray(X, dtype=float)
        scaled = p[:, None] * X if X.ndim == 2 else p * X
        out = LineOperator(Graph.complete(self.model.n)).apply(scaled)
        return p[:, None] * out if X.ndim == 2 else p * out

    def to_dense(self) -> np.ndarray:
        if self.shape[0] > self.size_guard:
            raise SizeGuardError("mean line matrix too large for dense form")
        p = self.probs
        return p[:, None] * complete_line_adjacency(self.model.n) * p[None, :]


def mean_line_matrix(model: SbmModel, size_guard: int = DEFAULT_SIZE_GUARD) -> MeanLineMatrix:
    return MeanLineMatrix(model, size_guard)
