"""Simulation experiments: edge embeddings, covariate fusion, concentration, error decay.

Every replicate draws from streams derived from ``(seed, replicate, purpose)``
and writes nothing itself; the collector writes CSVs in replicate order, so
output bytes do not depend on the worker count.
"""
from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .clustering import (
    adjacency_spectral_embedding,
    ari,
    default_centers,
    generate_edge_covariates,
    gmm_fit,
    scaled_embedding,
    scmase_fuse,
)
from .embedding import (
    block_means,
    core_residual,
    estimate_edge_positions,
    naive_line_embedding,
    noise_matrix,
    procrustes_align,
    projected_matrix,
    reference_subspace,
)
from .graph import SbmModel, sample_erdos_renyi, sample_sbm
from .io import write_embedding, write_rows
from .partition import InducedEdgePartition, canonical_labels
from .seeding import base_seed_from_env, derive_seed, make_rng
from .spectral import concentration_bounds, extreme_line_eigenvalues

EXPERIMENTS = ("fig1", "fig2", "fig3", "concentration", "thm2-decay")
FIG3_METHODS = ("induced-ase", "fused-noproj", "fused-proj", "proj-only", "cov-only")
COLUMN_PAIRS = ((0, 1), (1, 2), (0, 2))


class ConfigError(ValueError):
    pass


def _default_sigmas():
    return [float(s) for s in np.geomspace(0.05, 2.0, 8)]


@dataclass
class ExperimentConfig:
    experiment: str
    sizes: list = field(default_factory=lambda: [50, 50, 50])
    p_in: float = 0.5
    p_out: float = 0.2
    block_matrix: list | None = None  # overrides p_in / p_out when given
    sigmas: list = field(default_factory=_default_sigmas)
    replicates: int = 20
    seed: int | None = None
    output: str = "results"
    workers: int = 1
    # concentration
    n: int = 100
    p_values: list = field(default_factory=lambda: [0.2, 0.5])
    t_low: float = 0.1
    t_high: float = 3.0
    # thm2-decay
    n_values: list = field(default_factory=lambda: [60, 90, 120, 150])
    # fig3
    embed_dim: int = 3
    center_covariates: bool = False

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; expected one of {', '.join(EXPERIMENTS)}")
        if int(self.replicates) < 1:
            raise ConfigError("replicates must be at least 1")
        if int(self.workers) < 1:
            raise ConfigError("workers must be at least 1")
        if self.experiment == "fig3" and not self.sigmas:
            raise ConfigError("fig3 needs a nonempty sigma grid")
        if any(float(s) < 0 for s in self.sigmas):
            raise ConfigError("sigmas must be nonnegative")
        if self.seed is None:
            self.seed = base_seed_from_env()
        self.seed = int(self.seed)
        try:
            self.model()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(extra))}")
        if "experiment" not in data:
            raise ConfigError("config needs an 'experiment' key")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def load(cls, path, overrides: dict | None = None) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        data.update({k: v for k, v in (overrides or {}).items() if v is not None})
        return cls.from_dict(data)

    def model(self, sizes=None) -> SbmModel:
        sizes = list(self.sizes if sizes is None else sizes)
        if self.block_matrix is not None:
            return SbmModel.balanced(sizes, np.asarray(self.block_matrix, dtype=float))
        return SbmModel.two_level(sizes, float(self.p_in), float(self.p_out))

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def _map(fn, tasks, workers: int):
    if workers == 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


# fig1 / fig2


def _pair_name(pair) -> str:
    return f"{pair[0] + 1}-{pair[1] + 1}"


def _embedding_replicate(task):
    cfg, rep, mode = task
    model = cfg.model()
    part = InducedEdgePartition.from_model(model)
    g = sample_sbm(model, derive_seed(cfg.seed, rep, "graph"))
    truth = part.edge_blocks(g)
    if mode == "projected":
        emb = estimate_edge_positions(g, part, k=3)
    else:
        emb = naive_line_embedding(g, 3, seed=derive_seed(cfg.seed, rep, "svd"))
    scores = []
    for pair in COLUMN_PAIRS:
        fit = gmm_fit(emb.columns(pair), part.n_blocks, derive_seed(cfg.seed, rep, f"gmm-{_pair_name(pair)}"))
        scores.append((_pair_name(pair), ari(fit.labels, truth)))
    return emb, truth, part.blocks, scores


def _run_embedding(cfg: ExperimentConfig, mode: str, out: Path) -> list[Path]:
    results = _map(_embedding_replicate, [(cfg, r, mode) for r in range(cfg.replicates)], cfg.workers)
    emb, truth, blocks, _ = results[0]
    emb_path = out / f"{cfg.experiment}_embedding.csv"
    write_embedding(emb_path, emb.edges, truth, emb.positions, blocks)
    rows = [(rep, name, score) for rep, (*_, scores) in enumerate(results) for name, score in scores]
    ari_path = out / f"{cfg.experiment}_ari.csv"
    write_rows(ari_path, ["replicate", "vectors", "ari"], rows)
    summary = out / f"{cfg.experiment}_summary.csv"
    write_rows(summary, ["vectors", "mean_ari", "min_ari", "max_ari"], [
        (_pair_name(p), float(np.mean(v)), float(np.min(v)), float(np.max(v)))
        for p in COLUMN_PAIRS
        for v in [[s for _, name, s in rows if name == _pair_name(p)]]
    ])
    return [emb_path, ari_path, summary]


# fig3


def repair_small_clusters(labels, X, min_size: int = 2) -> np.ndarray:
    """Move members of clusters smaller than ``min_size`` to the nearest remaining centroid."""
    labels = np.asarray(labels).copy()
    counts = np.bincount(labels)
    keep = np.flatnonzero(counts >= min_size)
    if len(keep) == 0:
        return np.zeros_like(labels)
    small = ~np.isin(labels, keep)
    if small.any():
        cents = np.array([X[labels == c].mean(0) for c in keep])
        dist = ((X[small][:, None, :] - cents[None]) ** 2).sum(-1)
        labels[small] = keep[dist.argmin(1)]
    return canonical_labels(labels)


def _inverse_scale(X, k: int, seed) -> float:
    """``1 / sigma-hat`` from a ``k``-component fit of ``X``."""
    return 1.0 / np.sqrt(gmm_fit(X, k, seed).variance_estimate)


def _fig3_replicate(task):
    cfg, rep = task
    model = cfg.model()
    part = InducedEdgePartition.from_model(model)
    k, nb, d = part.k, part.n_blocks, int(cfg.embed_dim)
    seed = lambda purpose: derive_seed(cfg.seed, rep, purpose)  # noqa: E731
    g = sample_sbm(model, seed("graph"))
    truth = part.edge_blocks(g)

    ase = adjacency_spectral_embedding(g, k)
    est = repair_small_clusters(gmm_fit(ase, k, seed("ase")).labels, ase)
    est_part = InducedEdgePartition(est)
    induced = ari(est_part.edge_blocks(g), truth)

    proj_src = scaled_embedding(projected_matrix(g, est_part), d)
    proj_fit = gmm_fit(proj_src, nb, seed("gmm-proj"))
    proj_only = ari(proj_fit.labels, truth)
    w_proj = 1.0 / np.sqrt(proj_fit.variance_estimate)
    naive = naive_line_embedding(g, d, seed=seed("svd"))
    naive_src = naive.positions * naive.singular_values[:d]
    w_naive = _inverse_scale(naive_src, nb, seed("gmm-naive"))

    noise = make_rng(seed("covariate")).standard_normal((g.m, k))
    centers = default_centers(k)
    scores = []
    for s_idx, sigma in enumerate(cfg.sigmas):
        cov = generate_edge_covariates(part, g, centers, float(sigma), None, noise=noise).values
        if cfg.center_covariates:
            cov = cov - cov.mean(0)
        cov_fit = gmm_fit(scaled_embedding(cov, d), nb, seed(f"gmm-cov-{s_idx}"))
        w_cov = 1.0 / np.sqrt(cov_fit.variance_estimate)
        fused_proj = scmase_fuse([(proj_src, w_proj), (cov, w_cov)], d)
        fused_naive = scmase_fuse([(naive_src, w_naive), (cov, w_cov)], d)
        scores.append({
            "induced-ase": induced,
            "fused-noproj": ari(gmm_fit(fused_naive, nb, seed(f"gmm-fnp-{s_idx}")).labels, truth),
            "fused-proj": ari(gmm_fit(fused_proj, nb, seed(f"gmm-fp-{s_idx}")).labels, truth),
            "proj-only": proj_only,
            "cov-only": ari(cov_fit.labels, truth),
        })
    return scores


def _run_fig3(cfg: ExperimentConfig, out: Path) -> list[Path]:
    results = _map(_fig3_replicate, [(cfg, r) for r in range(cfg.replicates)], cfg.workers)
    rows = [
        (float(sigma), method, rep, results[rep][s_idx][method])
        for s_idx, sigma in enumerate(cfg.sigmas)
        for method in FIG3_METHODS
        for rep in range(cfg.replicates)
    ]
    path = out / "fig3_ari.csv"
    write_rows(path, ["sigma", "method", "replicate", "ari"], rows)
    summary = out / "fig3_summary.csv"
    write_rows(summary, ["sigma", "method", "mean_ari"], [
        (float(sigma), method, float(np.mean([results[r][s_idx][method] for r in range(cfg.replicates)])))
        for s_idx, sigma in enumerate(cfg.sigmas)
        for method in FIG3_METHODS
    ])
    return [path, summary]


# concentration


def _concentration_replicate(task):
    cfg, p_idx, rep = task
    p = float(cfg.p_values[p_idx])
    g = sample_erdos_renyi(int(cfg.n), p, derive_seed(cfg.seed, rep, f"graph-p{p_idx}"))
    return extreme_line_eigenvalues(g)


def _run_concentration(cfg: ExperimentConfig, out: Path) -> list[Path]:
    tasks = [(cfg, i, r) for i in range(len(cfg.p_values)) for r in range(cfg.replicates)]
    values = _map(_concentration_replicate, tasks, cfg.workers)
    rows, summary = [], []
    for i, p in enumerate(cfg.p_values):
        rep = concentration_bounds(int(cfg.n), float(p), float(p), cfg.t_low, cfg.t_high)
        lam = values[i * cfg.replicates:(i + 1) * cfg.replicates]
        for r, (l1, ln) in enumerate(lam):
            rep.record(l1, ln)
            rows.append((float(p), r, float(l1), float(ln)))
        summary.append((
            float(p), rep.replicates,
            float(np.mean([ln for _, ln in lam])), rep.expected_lower,
            float(np.mean([l1 for l1, _ in lam])), rep.expected_upper,
            rep.lower_threshold, rep.lower_frequency, rep.lower_tail,
            rep.upper_threshold, rep.upper_frequency, rep.upper_tail,
        ))
    path = out / "concentration_eigenvalues.csv"
    write_rows(path, ["p", "replicate", "lambda_1", "lambda_n"], rows)
    spath = out / "concentration_summary.csv"
    write_rows(spath, [
        "p", "replicates", "mean_lambda_n", "expected_lower", "mean_lambda_1", "expected_upper",
        "lower_threshold", "lower_frequency", "lower_bound",
        "upper_threshold", "upper_frequency", "upper_bound",
    ], summary)
    return [path, spath]


# thm2-decay


def _balanced_sizes(n: int, k: int) -> list[int]:
    base, extra = divmod(int(n), k)
    return [base + (1 if r < extra else 0) for r in range(k)]


def _decay_replicate(task):
    cfg, n_idx, rep = task
    n = int(cfg.n_values[n_idx])
    model = cfg.model(_balanced_sizes(n, len(cfg.sizes)))
    part = InducedEdgePartition.from_model(model)
    mu = block_means(model, part)
    g = sample_sbm(model, derive_seed(cfg.seed, rep, f"graph-n{n_idx}"))
    est = estimate_edge_positions(g, part).positions
    _, resid = procrustes_align(est, reference_subspace(g, part, mu))
    h = float(np.linalg.norm(noise_matrix(g, part, mu)))
    return resid, h, core_residual(g, part, mu)


def _run_decay(cfg: ExperimentConfig, out: Path) -> list[Path]:
    tasks = [(cfg, i, r) for i in range(len(cfg.n_values)) for r in range(cfg.replicates)]
    values = _map(_decay_replicate, tasks, cfg.workers)
    rows, summary = [], []
    for i, n in enumerate(cfg.n_values):
        chunk = np.array(values[i * cfg.replicates:(i + 1) * cfg.replicates])
        for r, (res, h, core) in enumerate(chunk):
            rows.append((int(n), r, float(res), float(h), float(core)))
        res, h, core = chunk.mean(0)
        scale = float(n) ** 0.75
        summary.append((int(n), float(res), float(h), float(h / scale), float(core), float(core / scale)))
    path = out / "thm2_decay.csv"
    write_rows(path, ["n", "replicate", "procrustes_residual", "h_norm", "core_residual"], rows)
    spath = out / "thm2_decay_summary.csv"
    write_rows(spath, ["n", "mean_procrustes_residual", "mean_h_norm", "h_norm_scaled",
                       "mean_core_residual", "core_residual_scaled"], summary)
    return [path, spath]


def run_experiment(cfg: ExperimentConfig) -> list[Path]:
    """Run one experiment and return the written files."""
    out = Path(cfg.output)
    try:
        out.mkdir(parents=True, exist_ok=True)
        if not os.access(out, os.W_OK):
            raise PermissionError(f"{out} is not writable")
    except OSError as exc:
        raise ConfigError(f"cannot write to {out}: {exc}") from None
    if cfg.experiment == "fig1":
        return _run_embedding(cfg, "projected", out)
    if cfg.experiment == "fig2":
        return _run_embedding(cfg, "naive", out)
    if cfg.experiment == "fig3":
        return _run_fig3(cfg, out)
    if cfg.experiment == "concentration":
        return _run_concentration(cfg, out)
    return _run_decay(cfg, out)
