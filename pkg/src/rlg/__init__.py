"""Spectral inference on random line graphs."""
from .graph import Graph, SbmModel, sample_erdos_renyi, sample_sbm
from .line_graph import LineGraph, LineOperator, build_line_graph
from .partition import InducedEdgePartition, build_M, build_Q, build_Qhat
from .spectral import (
    complete_line_spectrum,
    concentration_bounds,
    line_spectrum_dense,
    line_spectrum_via_transfer,
)
from .embedding import estimate_edge_positions, naive_line_embedding
from .damped_binomial import DampedBinomial
from .seeding import derive_seed

__version__ = "0.1.0"

__all__ = [
    "Graph", "SbmModel", "sample_sbm", "sample_erdos_renyi",
    "LineGraph", "LineOperator", "build_line_graph",
    "InducedEdgePartition", "build_Q", "build_M", "build_Qhat",
    "line_spectrum_via_transfer", "line_spectrum_dense", "complete_line_spectrum", "concentration_bounds",
    "estimate_edge_positions", "naive_line_embedding",
    "DampedBinomial", "derive_seed",
]
