"""Command-line entry point ``rlg``.

Exit codes: 0 success, 2 bad input or config, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from .clustering import (
    adjacency_spectral_embedding,
    gmm_fit,
    match_clusters_to_blocks,
    scaled_embedding,
    scmase_fuse,
    vertex_voting,
)
from .embedding import estimate_edge_positions, naive_line_embedding, projected_matrix
from .experiments import EXPERIMENTS, ConfigError, ExperimentConfig, run_experiment, repair_small_clusters
from .io import FormatError, read_covariates, read_edge_list, read_partition, write_embedding, write_rows
from .partition import InducedEdgePartition
from .seeding import base_seed_from_env, derive_seed
from .spectral import ConvergenceError, line_spectrum_dense, line_spectrum_via_transfer

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _add_run_flags(p, config_required: bool):
    p.add_argument("--config", required=config_required, help="JSON file with flat keys")
    p.add_argument("--seed", type=int, help="base seed (default: $RLG_SEED, then a fixed constant)")
    p.add_argument("--replicates", type=int)
    p.add_argument("--output", help="output directory")
    p.add_argument("--workers", type=int, help="parallel worker processes")
    p.add_argument("--sigmas", type=_float_list, help="fig3 noise grid, e.g. 0.1,0.5,1")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rlg", description="Spectral inference on random line graphs.")
    sub = parser.add_subparsers(dest="command", required=True)

    _add_run_flags(sub.add_parser("simulate", help="run the experiment named in a config file"), True)
    for name in EXPERIMENTS:
        _add_run_flags(sub.add_parser(name, help=f"run the {name} experiment"), False)

    sp = sub.add_parser("spectrum", help="line-graph spectrum of an edge list")
    sp.add_argument("edges")
    how = sp.add_mutually_exclusive_group()
    how.add_argument("--transfer", dest="method", action="store_const", const="transfer")
    how.add_argument("--dense", dest="method", action="store_const", const="dense")
    sp.set_defaults(method="transfer")
    sp.add_argument("-o", "--output", help="CSV path (default stdout)")

    ep = sub.add_parser("embed", help="edge latent positions")
    ep.add_argument("edges")
    ep.add_argument("partition", nargs="?", help="vertex partition file (needed for projected mode)")
    ep.add_argument("--mode", choices=("projected", "naive"), default="projected")
    ep.add_argument("-d", "--dim", type=int, help="embedding dimension (default: number of clusters, or 3)")
    ep.add_argument("--seed", type=int)
    ep.add_argument("-o", "--output", required=True)

    cp = sub.add_parser("cluster", help="cluster edges, optionally fusing covariates")
    cp.add_argument("edges")
    cp.add_argument("--partition", help="vertex partition; estimated from the adjacency embedding if absent")
    cp.add_argument("-k", type=int, default=3, help="vertex clusters when estimating the partition")
    cp.add_argument("--covariates", help="edge covariate CSV to fuse")
    cp.add_argument("--center-covariates", action="store_true")
    cp.add_argument("-d", "--dim", type=int, default=3)
    cp.add_argument("--seed", type=int)
    cp.add_argument("-o", "--output", required=True, help="edge cluster CSV")
    cp.add_argument("--vertices", help="also write voted vertex labels here")
    return parser


def _overrides(args) -> dict:
    return {
        "seed": args.seed, "replicates": args.replicates, "output": args.output,
        "workers": args.workers, "sigmas": args.sigmas,
    }


def _run(args) -> int:
    if args.config:
        cfg = ExperimentConfig.load(args.config, _overrides(args))
        if args.command != "simulate" and cfg.experiment != args.command:
            raise ConfigError(f"config is for {cfg.experiment!r}, not {args.command!r}")
    else:
        data = {k: v for k, v in _overrides(args).items() if v is not None}
        cfg = ExperimentConfig.from_dict({"experiment": args.command, **data})
    for path in run_experiment(cfg):
        print(path)
    return EXIT_OK


def _spectrum(args) -> int:
    g = read_edge_list(args.edges)
    spectrum = line_spectrum_via_transfer(g) if args.method == "transfer" else line_spectrum_dense(g)
    rows = [(float(v),) for v in spectrum.eigenvalues]
    if args.output:
        write_rows(args.output, ["eigenvalue"], rows)
    else:
        print("eigenvalue")
        for (v,) in rows:
            print(repr(v))
    return EXIT_OK


def _embed(args) -> int:
    g = read_edge_list(args.edges)
    seed = base_seed_from_env() if args.seed is None else args.seed
    if args.mode == "projected":
        if not args.partition:
            raise FormatError("projected mode needs a partition file")
        part = InducedEdgePartition(read_partition(args.partition, g.n))
        emb = estimate_edge_positions(g, part, args.dim)
        blocks, names = part.edge_blocks(g), part.blocks
    else:
        emb = naive_line_embedding(g, args.dim or 3, seed=derive_seed(seed, 0, "svd"))
        if args.partition:
            part = InducedEdgePartition(read_partition(args.partition, g.n))
            blocks, names = part.edge_blocks(g), part.blocks
        else:
            blocks, names = np.zeros(g.m, dtype=int), [(-1, -1)]
    write_embedding(args.output, emb.edges, blocks, emb.positions, names)
    return EXIT_OK


def _cluster(args) -> int:
    g = read_edge_list(args.edges)
    seed = base_seed_from_env() if args.seed is None else args.seed
    if args.partition:
        labels = read_partition(args.partition, g.n)
    else:
        ase = adjacency_spectral_embedding(g, args.k)
        labels = repair_small_clusters(gmm_fit(ase, args.k, derive_seed(seed, 0, "ase")).labels, ase)
    part = InducedEdgePartition(labels)
    src = scaled_embedding(projected_matrix(g, part), args.dim)
    fit = gmm_fit(src, part.n_blocks, derive_seed(seed, 0, "gmm-proj"))
    if args.covariates:
        cov = read_covariates(args.covariates, g)
        if args.center_covariates:
            cov = cov - cov.mean(0)
        cov_fit = gmm_fit(scaled_embedding(cov, args.dim), part.n_blocks, derive_seed(seed, 0, "gmm-cov"))
        fused = scmase_fuse([
            (src, 1 / np.sqrt(fit.variance_estimate)),
            (cov, 1 / np.sqrt(cov_fit.variance_estimate)),
        ], args.dim)
        fit = gmm_fit(fused, part.n_blocks, derive_seed(seed, 0, "gmm-fused"))
    write_rows(args.output, ["edge_i", "edge_j", "cluster"],
               [(int(i), int(j), int(c)) for (i, j), c in zip(g.edges, fit.labels)])
    if args.vertices:
        # clusters carry no block identity; map each to the block it overlaps most under the input partition
        blocks = match_clusters_to_blocks(fit.labels, part.edge_blocks(g), part.n_blocks)
        voted, isolated = vertex_voting(blocks, g, part.k)
        iso = set(isolated.tolist())
        write_rows(args.vertices, ["vertex", "cluster", "isolated"],
                   [(v, int(c), int(v in iso)) for v, c in enumerate(voted)])
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"spectrum": _spectrum, "embed": _embed, "cluster": _cluster}
    try:
        return handlers.get(args.command, _run)(args)
    except (ConvergenceError, np.linalg.LinAlgError, RuntimeError) as exc:
        # LinAlgError subclasses ValueError, so this clause comes first
        print(f"rlg: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, FormatError, OSError, ValueError) as exc:
        print(f"rlg: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
