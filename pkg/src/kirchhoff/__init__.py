"""Factorization and compression of Kirchhoff polynomials of digraphs.

The Kirchhoff polynomial of a labeled digraph sums, over all arborescences,
the product of their edge labels.  This package splits it into prime
factors using strongly connected components and dominator trees, and
compresses each prime by deletion-contraction into a shared expression DAG
that stays small when the number of arborescences is astronomically large.
"""

from .decompose import Factor, Factorization, Rule, all_factors, domination_factors, \
    is_prime_component, scc_factors
from .digraph import Digraph, Edge, GraphError, comp, contract, contract_edge, delete_edge, \
    dominator_tree, from_edges, has_arborescence, normalize, parse_edge_list, scc, transpose
from .engine import ZERO, CompressConfig, CompressionReport, Heuristic, ZeroEnumerator, \
    build_figure1_graph, choose_edge, compress, count_arborescences, report
from .errors import CapExceededError, DepthExceededError, KirchhoffError, NoArborescenceError
from .expr import Expr, Monomial, count_monomials, expand, poly_equal, pretty, size_metrics
from .ops import PeSpec, kirchhoff_gcd, pe_compose, pe_generate, sample_arborescence

__all__ = [
    "CapExceededError", "CompressConfig", "CompressionReport", "DepthExceededError",
    "Digraph", "Edge", "Expr", "Factor", "Factorization", "GraphError", "Heuristic",
    "KirchhoffError", "Monomial", "NoArborescenceError", "PeSpec", "Rule", "ZERO",
    "ZeroEnumerator", "all_factors", "build_figure1_graph", "choose_edge", "comp",
    "compress", "contract", "contract_edge", "count_arborescences", "count_monomials",
    "delete_edge", "dominator_tree", "domination_factors", "expand", "from_edges",
    "has_arborescence", "is_prime_component", "kirchhoff_gcd", "normalize",
    "parse_edge_list", "pe_compose", "pe_generate", "poly_equal", "pretty", "report",
    "sample_arborescence", "scc", "scc_factors", "size_metrics", "transpose",
]
