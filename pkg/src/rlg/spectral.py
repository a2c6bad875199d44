"""Line-graph spectra, eigenvalue concentration bounds and a partial SVD."""
from __future__ import annotations

from dataclasses import dataclass, field
from math import comb, e, exp, log

import numpy as np

from .graph import Graph
from .line_graph import LineGraph
from .seeding import make_rng

TRANSFER_DENSE_LIMIT = 4000


class ConvergenceError(RuntimeError):
    """Iterative solver stopped before reaching tolerance.

    The best iterate is attached as ``.result``.
    """

    def __init__(self, msg, result=None):
        super().__init__(msg)
        self.result = result


@dataclass(frozen=True)
class SpectrumResult:
    eigenvalues: np.ndarray  # nonincreasing
    multiplicities: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.eigenvalues)

    def lam(self, ell: int) -> float:
        """``lambda_ell``, 1-based; positions past the order read as -2."""
        if ell <= len(self.eigenvalues):
            return float(self.eigenvalues[ell - 1])
        return -2.0


def _sorted_desc(values) -> np.ndarray:
    return np.sort(np.asarray(values, dtype=float))[::-1]


def signless_laplacian(g: Graph) -> np.ndarray:
    """``A(G) + D``, which equals ``B B^T``."""
    A = g.adjacency()
    return A + np.diag(g.degrees().astype(float))


def line_spectrum_via_transfer(g: Graph) -> SpectrumResult:
    """Full spectrum of ``A(L(G))`` from the ``n x n`` matrix ``A(G) + D``.

    ``B B^T`` and ``B^T B`` share nonzero eigenvalues, so the ``m x m`` problem
    is never formed: pad with ``m - n`` copies of -2, or drop ``n - m``.
    """
    n, m = g.n, g.m
    if n > TRANSFER_DENSE_LIMIT:
        raise ValueError(f"transfer path is dense and limited to n <= {TRANSFER_DENSE_LIMIT}")
    if m == 0:
        return SpectrumResult(np.zeros(0), {-2.0: 0})
    shifted = np.linalg.eigvalsh(signless_laplacian(g)) - 2.0
    shifted = _sorted_desc(shifted)
    if m >= n:
        vals = np.concatenate([shifted, np.full(m - n, -2.0)])
    else:
        # the n - m smallest eigenvalues of B B^T are the structural zeros
        vals = shifted[:m]
    return SpectrumResult(_sorted_desc(vals), {-2.0: max(m - n, 0)})


def line_spectrum_dense(g: Graph) -> SpectrumResult:
    A = LineGraph(g).adjacency()
    return SpectrumResult(_sorted_desc(np.linalg.eigvalsh(A)))


def complete_line_spectrum(n: int) -> SpectrumResult:
    if n < 3:
        raise ValueError("complete line spectrum needs n >= 3")
    neg = comb(n, 2) - n
    vals = np.concatenate([[2.0 * n - 4], np.full(n - 1, n - 4.0), np.full(neg, -2.0)])
    return SpectrumResult(_sorted_desc(vals), {float(n - 4): n - 1, -2.0: neg})


def extreme_line_eigenvalues(g: Graph) -> tuple[float, float]:
    """``(lambda_1, lambda_n)`` of ``A(L(G))``, with ``lambda_ell = -2`` past the order."""
    spectrum = line_spectrum_via_transfer(g)
    return spectrum.lam(1), spectrum.lam(g.n)


def multiset_close(a, b, atol: float = 1e-8) -> bool:
    a, b = np.sort(np.asarray(a, float)), np.sort(np.asarray(b, float))
    return a.shape == b.shape and bool(np.all(np.abs(a - b) <= atol))


@dataclass
class ConcentrationReport:
    n: int
    p_min: float
    p_max: float
    t_low: float
    t_high: float
    expected_lower: float  # lower bound on E[lambda_n]
    expected_upper: float  # upper bound on E[lambda_1]
    lower_threshold: float  # event lambda_n <= this
    upper_threshold: float  # event lambda_1 >= this
    lower_tail: float
    upper_tail: float
    lower_exceedances: int = 0
    upper_exceedances: int = 0
    replicates: int = 0

    def record(self, lam_1: float, lam_n: float) -> None:
        self.replicates += 1
        self.lower_exceedances += int(lam_n <= self.lower_threshold)
        self.upper_exceedances += int(lam_1 >= self.upper_threshold)

    @property
    def lower_frequency(self) -> float:
        return self.lower_exceedances / self.replicates if self.replicates else float("nan")

    @property
    def upper_frequency(self) -> float:
        return self.upper_exceedances / self.replicates if self.replicates else float("nan")


def _clip01(x: float) -> float:
    return min(max(x, 0.0), 1.0)


def _check_params(n, p_min, p_max, t_low, t_high):
    if n < 2:
        raise ValueError("n must be at least 2")
    if not 0 < p_min <= p_max <= 1:
        raise ValueError("need 0 < p_min <= p_max <= 1")
    if not 0 <= t_low < 1:
        raise ValueError("t_low must lie in [0, 1)")
    if t_high < e:
        raise ValueError("t_high must be at least e")


def concentration_bounds(n: int, p_min: float, p_max: float, t_low: float = 0.1, t_high: float = 3.0) -> ConcentrationReport:
    """Expectation and tail bounds for the extreme nontrivial eigenvalues of ``A(L(G))``."""
    _check_params(n, p_min, p_max, t_low, t_high)
    ln = log(n)
    return ConcentrationReport(
        n=n, p_min=p_min, p_max=p_max, t_low=t_low, t_high=t_high,
        expected_lower=0.63 * p_min * (n - 2) - 2 * (ln + 1),
        expected_upper=3.44 * p_max * (n - 1) + 2 * (ln - 1),
        lower_threshold=t_low * p_min * (n - 2) - 2,
        upper_threshold=t_high * p_max * 2 * (n - 1) - 2,
        lower_tail=_clip01(n * exp(-((1 - t_low) ** 2) * p_min * (n - 2) / 4)),
        upper_tail=_clip01(n * (e / t_high) ** (t_high * p_min * (n - 1))),
    )


def concentration_bounds_support(support: Graph, p_min: float, p_max: float,
                                 t_low: float = 0.1, t_high: float = 3.0) -> ConcentrationReport:
    """Tail bounds when only the pairs of ``support`` can appear.

    ``mu_1``, ``mu_n`` are the extreme nontrivial eigenvalues of
    ``A(L(K)) + 2I`` for the support graph ``K``.
    """
    n = support.n
    _check_params(n, p_min, p_max, t_low, t_high)
    spectrum = line_spectrum_via_transfer(support)
    mu_1 = spectrum.lam(1) + 2
    mu_n = spectrum.lam(n) + 2
    return ConcentrationReport(
        n=n, p_min=p_min, p_max=p_max, t_low=t_low, t_high=t_high,
        expected_lower=float("nan"), expected_upper=float("nan"),
        lower_threshold=t_low * p_min * mu_n - 2,
        upper_threshold=t_high * p_max * mu_1 - 2,
        lower_tail=_clip01(n * exp(-((1 - t_low) ** 2) * p_min * mu_n / 4)),
        upper_tail=_clip01(n * (e / t_high) ** (t_high * p_min * mu_1 / 2)),
    )


def partial_svd(op, k: int, tol: float = 1e-10, seed=0, oversample: int = 10,
                max_iter: int = 300):
    """Top-``k`` singular triplets by randomized subspace iteration.

    ``op`` is a dense array or anything with ``@``/``.T`` (e.g. a scipy
    LinearOperator).  Stops when every kept triplet satisfies
    ``||A v_i - s_i u_i|| <= tol * s_1``; otherwise raises
    :class:`ConvergenceError` carrying the last iterate.
    """
    m, n = op.shape
    if not 1 <= k <= min(m, n):
        raise ValueError(f"k={k} outside 1..{min(m, n)}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    rng = make_rng(seed)
    width = min(k + oversample, min(m, n))
    AT = op.T
    Y = op @ rng.standard_normal((n, width))
    Qm, _ = np.linalg.qr(Y)
    result = None
    for it in range(1, max_iter + 1):
        Z, _ = np.linalg.qr(AT @ Qm)
        Qm, _ = np.linalg.qr(op @ Z)
        # Rayleigh-Ritz on the current range
        small = np.asarray(AT @ Qm).T  # Qm^T A, width x n
        Us, s, Vt = np.linalg.svd(small, full_matrices=False)
        U = Qm @ Us[:, :k]
        V = Vt[:k].T
        s = s[:k]
        resid = np.linalg.norm(np.asarray(op @ V) - U * s, axis=0)
        result = (U, s, V)
        if s[0] == 0 or np.all(resid <= tol * s[0]):
            return result
    raise ConvergenceError(f"partial_svd did not converge in {max_iter} iterations", result)
