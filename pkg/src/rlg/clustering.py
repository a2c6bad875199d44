"""Mixture clustering, ARI, edge covariates and embedding fusion."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.special import logsumexp
from sklearn.cluster import kmeans_plusplus
from sklearn.metrics import adjusted_rand_score

from .graph import Graph
from .partition import InducedEdgePartition, canonical_labels
from .seeding import make_rng

RIDGE = 1e-6


@dataclass
class GmmResult:
    """Best EM run.  ``labels`` are contiguous from 0 in order of first appearance."""

    labels: np.ndarray
    means: np.ndarray
    covariances: np.ndarray
    weights: np.ndarray
    log_likelihood: float
    history: list = field(default_factory=list)  # per-iteration log-likelihood of the best run
    converged: bool = True

    @property
    def n_clusters(self) -> int:
        return int(self.labels.max()) + 1 if len(self.labels) else 0

    @property
    def covariance_traces(self) -> np.ndarray:
        return np.trace(self.covariances, axis1=1, axis2=2)

    @property
    def variance_estimate(self) -> float:
        """Mixture-weighted mean covariance trace divided by the dimension."""
        return float(np.sum(self.weights * self.covariance_traces) / self.means.shape[1])


class _EmptyComponent(Exception):
    pass


def _log_resp(X, means, covs, weights):
    d = X.shape[1]
    L = np.linalg.cholesky(covs)  # (k, d, d)
    Linv = np.linalg.inv(L)
    diff = X[None, :, :] - means[:, None, :]  # (k, n, d)
    sol = np.einsum("kij,knj->kni", Linv, diff)
    maha = np.einsum("kni,kni->kn", sol, sol)
    logdet = 2 * np.log(np.diagonal(L, axis1=1, axis2=2)).sum(1)
    logp = (np.log(weights)[:, None] - 0.5 * (d * np.log(2 * np.pi) + logdet[:, None] + maha)).T
    total = logsumexp(logp, axis=1)
    return logp - total[:, None], float(total.sum())


def _ridge(cov, scale):
    d = cov.shape[0]
    return cov + RIDGE * scale * np.eye(d)


def _em_once(X, k, rng, max_iter, tol):
    n, d = X.shape
    scale = max(float(np.trace(np.cov(X.T).reshape(d, d))), 1e-12)
    centers, _ = kmeans_plusplus(X, k, random_state=int(rng.integers(2**31 - 1)))
    # hard assignment to the seeds gives the starting covariances
    dist = ((X[:, None, :] - centers[None]) ** 2).sum(-1)
    assign = dist.argmin(1)
    means = centers.copy()
    covs = np.empty((k, d, d))
    weights = np.empty(k)
    for c in range(k):
        pts = X[assign == c]
        if len(pts) == 0:
            raise _EmptyComponent
        weights[c] = len(pts) / n
        diff = pts - means[c]
        covs[c] = _ridge(diff.T @ diff / len(pts), scale)
    history = []
    log_resp, ll = _log_resp(X, means, covs, weights)
    history.append(ll)
    converged = False
    for _ in range(max_iter):
        resp = np.exp(log_resp)
        nk = resp.sum(0)
        if np.any(nk < 1e-8 * n):
            raise _EmptyComponent
        weights = nk / n
        means = resp.T @ X / nk[:, None]
        diff = X[None, :, :] - means[:, None, :]
        covs = np.einsum("nk,kni,knj->kij", resp, diff, diff) / nk[:, None, None]
        covs += RIDGE * scale * np.eye(d)
        log_resp, ll = _log_resp(X, means, covs, weights)
        history.append(ll)
        if abs(history[-1] - history[-2]) <= tol * n:
            converged = True
            break
    return GmmResult(
        labels=log_resp.argmax(1), means=means, covariances=covs, weights=weights,
        log_likelihood=ll, history=history, converged=converged,
    )


def gmm_fit(X, k: int, seed, n_init: int = 5, max_iter: int = 200, tol: float = 1e-6) -> GmmResult:
    """Full-covariance EM with k-means++ starts; keeps the best of ``n_init`` runs.

    Covariances carry a ridge of ``1e-6`` times the data's total variance, so
    duplicated points cannot make them singular.  A run that loses a
    component is restarted.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if len(X) < k:
        raise ValueError(f"need at least {k} rows, got {len(X)}")
    rng = make_rng(seed)
    if k == 1:
        seeds = 1
    else:
        seeds = n_init
    best = None
    attempts = 0
    done = 0
    while done < seeds:
        attempts += 1
        try:
            res = _em_once(X, k, rng, max_iter, tol)
        except _EmptyComponent:
            if attempts > 10 * seeds:
                raise RuntimeError("GMM kept losing components; reduce k")
            continue
        done += 1
        if best is None or res.log_likelihood > best.log_likelihood:
            best = res
    best.labels = canonical_labels(best.labels)
    return best


def ari(a, b) -> float:
    """Adjusted Rand index between two labelings of the same items."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError("clusterings cover different item sets")
    return float(adjusted_rand_score(a, b))


@dataclass(frozen=True)
class CovariateSet:
    values: np.ndarray  # m x q, rows in graph edge order
    centers: np.ndarray
    sigma: float


def default_centers(k: int = 3, scale: float = 1.0) -> np.ndarray:
    """One center per induced block, in block-column order.

    Diagonal blocks sit on the coordinate axes and block ``(i, j)`` on the
    unit arc midway between axes ``i`` and ``j``.
    """
    from .partition import block_pairs

    pts = []
    for i, j in block_pairs(k):
        v = np.zeros(k)
        if i == j:
            v[i] = 1.0
        else:
            v[i] = v[j] = 1 / np.sqrt(2)
        pts.append(v)
    return scale * np.array(pts)


def generate_edge_covariates(part: InducedEdgePartition, g: Graph, centers, sigma: float, seed,
                             noise: np.ndarray | None = None) -> CovariateSet:
    """Block center plus ``N(0, sigma^2 I)`` noise for each present edge.

    ``noise`` optionally supplies the standard-normal draws, so one draw can
    be reused across a sigma grid.
    """
    centers = np.asarray(centers, dtype=float)
    if len(centers) != part.n_blocks:
        raise ValueError(f"need {part.n_blocks} centers, got {len(centers)}")
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    blocks = part.edge_blocks(g)
    if noise is None:
        noise = make_rng(seed).standard_normal((g.m, centers.shape[1]))
    return CovariateSet(values=centers[blocks] + sigma * noise, centers=centers, sigma=sigma)


def adjacency_spectral_embedding(g: Graph, d: int) -> np.ndarray:
    """Top-``d`` eigenvectors of ``A(G)`` by magnitude, scaled by ``|lambda|^{1/2}``."""
    if g.n == 0:
        raise ValueError("empty graph")
    w, V = np.linalg.eigh(g.adjacency())
    order = np.argsort(-np.abs(w), kind="stable")[:d]
    return V[:, order] * np.sqrt(np.abs(w[order]))


def ase_vertex_partition(g: Graph, d: int, k: int, seed) -> np.ndarray:
    if k == 1:
        return np.zeros(g.n, dtype=np.int64)
    X = adjacency_spectral_embedding(g, d)
    return gmm_fit(X, k, seed).labels


def scaled_embedding(X, d: int | None = None) -> np.ndarray:
    """``U S`` from the thin SVD of ``X``, truncated to ``d`` columns."""
    U, s, _ = np.linalg.svd(np.asarray(X, dtype=float), full_matrices=False)
    d = len(s) if d is None else min(d, len(s))
    return U[:, :d] * s[:d]


def scmase_fuse(sources, d: int) -> np.ndarray:
    """Top-``d`` left singular vectors of ``[w_1 U_1 S_1, w_2 U_2 S_2, ...]``."""
    if not sources:
        raise ValueError("no sources")
    rows = {np.asarray(X).shape[0] for X, _ in sources}
    if len(rows) != 1:
        raise ValueError("sources have different row counts")
    blocks = []
    for X, w in sources:
        if w < 0:
            raise ValueError("weights must be nonnegative")
        blocks.append(w * scaled_embedding(X, d))
    cat = np.hstack(blocks)
    if d > min(cat.shape):
        raise ValueError(f"d={d} exceeds the concatenated rank bound {min(cat.shape)}")
    U, _, _ = np.linalg.svd(cat, full_matrices=False)
    return U[:, :d]


def match_clusters_to_blocks(edge_clusters, reference_blocks, n_blocks: int) -> np.ndarray:
    """Relabel arbitrary edge clusters as block columns by maximal overlap with a reference."""
    edge_clusters = np.asarray(edge_clusters)
    reference_blocks = np.asarray(reference_blocks)
    k = int(edge_clusters.max()) + 1
    table = np.zeros((k, n_blocks))
    np.add.at(table, (edge_clusters, reference_blocks), 1)
    rows, cols = linear_sum_assignment(-table)
    mapping = np.arange(k) % n_blocks
    mapping[rows] = cols
    return mapping[edge_clusters]


def vertex_voting(edge_blocks, g: Graph, k: int):
    """Vertex labels from block-labelled edges.

    An incident edge in block ``(i, i)`` gives 2 votes to ``i``; one in
    ``(i, j)`` gives one vote each to ``i`` and ``j``.  Ties go to the smaller
    label.  Returns ``(labels, isolated)``, where isolated vertices get label 0.
    """
    from .partition import block_pairs

    edge_blocks = np.asarray(edge_blocks)
    if len(edge_blocks) != g.m:
        raise ValueError("one block label per edge is required")
    pairs = block_pairs(k)
    votes = np.zeros((g.n, k))
    for (u, v), c in zip(g.edges, edge_blocks):
        i, j = pairs[c]
        for x in (u, v):
            if i == j:
                votes[x, i] += 2
            else:
                votes[x, i] += 1
                votes[x, j] += 1
    labels = votes.argmax(1)  # argmax returns the first maximum
    isolated = np.flatnonzero(votes.sum(1) == 0)
    return labels, isolated
