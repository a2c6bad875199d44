"""The Damped Binomial law ``Z = X / sqrt(X + Y)``.

``X ~ Binomial(a, p)`` and ``Y ~ Binomial(b, p)`` are independent and
``Z = 0`` when ``X = Y = 0``.  With ``a = 1`` and ``b = m - 1`` this is the law
of the normalisation weight of a single edge in a block of size ``m``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import binom

from .seeding import make_rng

MAX_OUTCOMES = 10**6


class IntractableError(ValueError):
    pass


@dataclass(frozen=True)
class DampedBinomial:
    a: int
    b: int
    p: float

    def __post_init__(self):
        if self.a < 0 or self.b < 0 or self.a + self.b < 1:
            raise ValueError("need a, b >= 0 and a + b >= 1")
        if not 0 < self.p <= 1:
            raise ValueError("p must lie in (0, 1]")

    @property
    def trials(self) -> int:
        return self.a + self.b


def sample(d: DampedBinomial, seed, size=None):
    rng = make_rng(seed)
    x = rng.binomial(d.a, d.p, size=size)
    y = rng.binomial(d.b, d.p, size=size)
    t = x + y
    with np.errstate(invalid="ignore", divide="ignore"):
        z = np.where(t > 0, x / np.sqrt(np.maximum(t, 1)), 0.0)
    return float(z) if size is None else z


def _grid(d: DampedBinomial, max_outcomes: int):
    if (d.a + 1) * (d.b + 1) > max_outcomes:
        raise IntractableError(f"{(d.a + 1) * (d.b + 1)} outcomes exceeds {max_outcomes}")
    x = np.arange(d.a + 1)
    y = np.arange(d.b + 1)
    w = np.outer(binom.pmf(x, d.a, d.p), binom.pmf(y, d.b, d.p))
    t = x[:, None] + y[None, :]
    z = np.where(t > 0, x[:, None] / np.sqrt(np.maximum(t, 1)), 0.0)
    return z, w


def exhaustive_expectation(d: DampedBinomial, fn, max_outcomes: int = MAX_OUTCOMES) -> float:
    """``E[fn(Z)]`` by summing over the full ``(X, Y)`` pmf."""
    z, w = _grid(d, max_outcomes)
    return float(np.sum(w * fn(z)))


def exhaustive_moment(d: DampedBinomial, k: int, max_outcomes: int = MAX_OUTCOMES) -> float:
    return exhaustive_expectation(d, lambda z: z**k, max_outcomes)


def sqrt_binomial_mean(trials: int, p: float) -> float:
    """``E[sqrt(T)]`` for ``T ~ Binomial(trials, p)`` by direct summation."""
    t = np.arange(trials + 1)
    return float(np.sum(binom.pmf(t, trials, p) * np.sqrt(t)))


def exact_moment(d: DampedBinomial, k: int, max_outcomes: int = MAX_OUTCOMES) -> float:
    """``E[Z^k]``; orders 1 and 2 use closed identities, others exhaustive summation."""
    a, b, p = d.a, d.b, d.p
    N = a + b
    if k == 1:
        return a / N * sqrt_binomial_mean(N, p)
    if k == 2:
        if N == 1:
            return a * p
        ff = N * (N - 1)
        return a * (a - 1) / ff * N * p + a * b / ff * (1 - (1 - p) ** N)
    return exhaustive_moment(d, k, max_outcomes)


def asymptotic_moments(d: DampedBinomial) -> dict:
    """Leading terms of the first four moments and two variances (error ``O(1/a^2)`` when ``b ~ a^2``)."""
    a, b, p = float(d.a), float(d.b), d.p
    if d.a < 1 or d.b < 1:
        raise ValueError("asymptotic moments need a >= 1 and b >= 1")
    N = a + b
    lam = N * p
    ff = lambda x, j: np.prod([x - i for i in range(j)])  # noqa: E731
    m1 = a / N * np.sqrt(lam)
    m2 = (ff(a, 2) * lam + a * b) / ff(N, 2)
    m3 = np.sqrt(lam) * (ff(a, 3) * lam + 3 * a * (a - 1) * b) / ff(N, 3)
    m4 = lam * (ff(a, 4) * lam + 6 * a * (a - 1) * (a - 2) * b) / ff(N, 4)
    var = a * b * (1 - p) / ff(N, 2)
    q = p * (1 - p)
    centered_sq = 4 * b**3 * a**3 * q / b**5 + 4 * b * a**3 * q / b**3 - 8 * b**2 * a**3 * q / b**4
    return {
        "mean": m1, "m2": m2, "m3": m3, "m4": m4,
        "var": var, "var_centered_sq": centered_sq,
    }


def mu_bounds(B: float, m: int) -> tuple[float, float]:
    """Interval containing the mean normalisation weight of an edge with probability ``B`` in a block of size ``m``."""
    if not 0 < B <= 1:
        raise ValueError("B must lie in (0, 1]")
    if m < 1:
        raise ValueError("m must be at least 1")
    root = np.sqrt(B)
    return float(root - (1 - B) / (2 * root * m)), float(root)


def exact_mu(B: float, m: int) -> float:
    """``E[Y_e] = sqrt(m) E[W]`` with ``W ~ DampedBinomial(1, m-1, B)``, i.e. ``E[sqrt(T)]/sqrt(m)``."""
    if B == 0:
        return 0.0
    return sqrt_binomial_mean(int(m), float(B)) / np.sqrt(m)


def sqrt_mean_bounds(trials: int, p: float) -> tuple[float, float]:
    """Bounds on ``E[sqrt(T)]`` from the square-root Taylor envelope."""
    mu = trials * p
    var = trials * p * (1 - p)
    return mu**0.5 - var / (2 * mu**1.5), mu**0.5


def centered_square_variance_identity(d: DampedBinomial, max_outcomes: int = MAX_OUTCOMES) -> float:
    """``Var((Z - EZ)^2)`` assembled from raw moments."""
    m1, m2, m3, m4 = (exhaustive_moment(d, k, max_outcomes) for k in (1, 2, 3, 4))
    var = m2 - m1**2
    return (m4 - m2**2) + 4 * m1**2 * var - 4 * m1 * (m3 - m2 * m1)


def centered_square_variance_direct(d: DampedBinomial, max_outcomes: int = MAX_OUTCOMES) -> float:
    mean = exhaustive_moment(d, 1, max_outcomes)
    c2 = exhaustive_expectation(d, lambda z: (z - mean) ** 2, max_outcomes)
    c4 = exhaustive_expectation(d, lambda z: (z - mean) ** 4, max_outcomes)
    return c4 - c2**2
