"""Text formats: edge lists, partition files, covariate and embedding CSVs."""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .graph import Graph


class FormatError(ValueError):
    pass


def _content_lines(path):
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def read_edge_list(path) -> Graph:
    """``n m`` header, then ``m`` lines ``i j`` with ``0 <= i < j < n``."""
    lines = list(_content_lines(path))
    if not lines:
        raise FormatError(f"{path}: empty edge list")
    try:
        n, m = (int(x) for x in lines[0][1].split())
        pairs = [tuple(int(x) for x in line.split()) for _, line in lines[1:]]
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None
    if len(pairs) != m:
        raise FormatError(f"{path}: header says {m} edges, found {len(pairs)}")
    for (lineno, _), pair in zip(lines[1:], pairs):
        if len(pair) != 2 or not 0 <= pair[0] < pair[1] < n:
            raise FormatError(f"{path}:{lineno}: bad edge {pair}")
    try:
        return Graph.from_edges(n, pairs)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None


def write_edge_list(g: Graph, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"{g.n} {g.m}\n")
        for i, j in g.edges:
            fh.write(f"{i} {j}\n")


def read_partition(path, n: int | None = None) -> np.ndarray:
    """One ``vertex_id cluster_id`` line per vertex; cluster ids are remapped to ``0..k-1`` in sorted order."""
    entries = {}
    for lineno, line in _content_lines(path):
        parts = line.split()
        if len(parts) != 2:
            raise FormatError(f"{path}:{lineno}: expected 'vertex cluster'")
        v, c = int(parts[0]), parts[1]
        if v in entries:
            raise FormatError(f"{path}:{lineno}: vertex {v} listed twice")
        entries[v] = c
    n = len(entries) if n is None else n
    if sorted(entries) != list(range(n)):
        raise FormatError(f"{path}: vertices must be exactly 0..{n - 1}")
    raw = [entries[v] for v in range(n)]
    try:
        keys = sorted(set(raw), key=int)
    except ValueError:
        keys = sorted(set(raw))
    index = {c: i for i, c in enumerate(keys)}
    return np.array([index[c] for c in raw], dtype=np.int64)


def write_partition(labels, path) -> None:
    with open(path, "w") as fh:
        for v, c in enumerate(labels):
            fh.write(f"{v} {int(c)}\n")


def fmt(x) -> str:
    """Shortest round-tripping float text, so reruns are byte-identical."""
    return repr(float(x))


def read_covariates(path, g: Graph) -> np.ndarray:
    """CSV ``edge_i,edge_j,c1..cq``; rows are reordered to ``g.edges``."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[:2] != ["edge_i", "edge_j"] or len(header) < 3:
            raise FormatError(f"{path}: header must be edge_i,edge_j,c1..cq")
        rows = {}
        for rec in reader:
            if not rec:
                continue
            i, j = sorted((int(rec[0]), int(rec[1])))
            rows[(i, j)] = [float(x) for x in rec[2:]]
    try:
        return np.array([rows[(int(i), int(j))] for i, j in g.edges])
    except KeyError as exc:
        raise FormatError(f"{path}: no covariates for edge {exc.args[0]}") from None


def write_covariates(g: Graph, values, path) -> None:
    values = np.asarray(values)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["edge_i", "edge_j"] + [f"c{q + 1}" for q in range(values.shape[1])])
        for (i, j), row in zip(g.edges, values):
            w.writerow([int(i), int(j)] + [fmt(x) for x in row])


def write_embedding(path, edges, blocks, positions, block_pairs) -> None:
    """CSV ``edge_i,edge_j,block_r,block_s,x1..xd``; block ids are 0-based."""
    positions = np.asarray(positions)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["edge_i", "edge_j", "block_r", "block_s"] + [f"x{q + 1}" for q in range(positions.shape[1])])
        for (i, j), b, row in zip(edges, blocks, positions):
            r, s = block_pairs[int(b)]
            w.writerow([int(i), int(j), r, s] + [fmt(x) for x in row])


def write_rows(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(x) if isinstance(x, (float, np.floating)) else x for x in row])
