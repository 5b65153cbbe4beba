"""Simulator and search engine for adapted quantum walks on bipartite multigraphs."""

from .chain import (
    ProductChain,
    TransitionPair,
    complete_pair,
    default_pair,
    discriminant,
    hitting_time,
    interpolated_discriminant_blocks,
    product_chain,
    random_walk_p1,
)
from .errors import TesselwalkError
from .interp import InterpolationSchedule, OracleSpec, build_Wr
from .multigraph import BipartiteMultigraph, clique_graph, line_graph
from .search import AlgorithmConfig, SearchOutcome, walk_search, qff_apply, qff_plan, search_multigraph
from .walkops import build_adapted_operators, build_qdb_amplitudes, double_discriminant

__version__ = "0.1.0"

__all__ = [
    "AlgorithmConfig", "BipartiteMultigraph", "InterpolationSchedule", "OracleSpec",
    "ProductChain", "SearchOutcome", "TesselwalkError", "TransitionPair", "walk_search",
    "build_Wr", "build_adapted_operators", "build_qdb_amplitudes", "clique_graph",
    "complete_pair", "default_pair", "discriminant", "double_discriminant", "hitting_time",
    "interpolated_discriminant_blocks", "line_graph", "product_chain", "qff_apply",
    "qff_plan", "random_walk_p1", "search_multigraph",
]
