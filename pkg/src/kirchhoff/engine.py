"""Recursive compression of κ(G).

Each digraph is split into prime factors.  A small prime factor is expanded
by brute force; a larger one is broken by deletion-contraction on an edge
e = uv,

    κ(F) = κ(F - e) + ℓ(e) · κ(F({u, v} -> u)),

and both sides are compressed recursively.  The result is a product of the
factor expressions, shared through the hash-consed expression store.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from typing import Optional, Union

from . import expr as ex
from .decompose import all_factors, scc_factors
from .digraph import (
    Digraph,
    contract_edge,
    delete_edge,
    dominator_tree,
    from_edges,
    has_arborescence,
    is_rooted,
    normalize,
    reachable_from,
    scc,
    scc_counts_without_each_edge,
)
from .errors import DepthExceededError, KirchhoffError
from .expr import Expr
from .oracle import kirchhoff_expr, kirchhoff_monomials

log = logging.getLogger(__name__)


class Heuristic(enum.Enum):
    MAX_SCC_SPLIT = "scc"
    MAX_NEW_DOMINATORS = "dom"
    MAX_EDGE_ELIMINATION = "elim"


@dataclass(frozen=True)
class CompressConfig:
    heuristic: Heuristic = Heuristic.MAX_SCC_SPLIT
    expand_threshold: int = 5
    max_depth: Optional[int] = None
    seed: Optional[int] = None
    memoize: bool = True

    def __post_init__(self):
        if self.expand_threshold < 2:
            raise ValueError("expand_threshold must be at least 2")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")


class ZeroEnumerator:
    """κ of a digraph without arborescences: the empty sum.

    Expressions cannot represent zero, so this stands in for it.
    """

    count = 0
    degree = None

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "ZeroEnumerator()"

    def __str__(self):
        return "0"


ZERO = ZeroEnumerator()

Enumerator = Union[Expr, ZeroEnumerator]


# ---------------------------------------------------------------------------
# Edge choice


def _dominator_pairs_without(g: Digraph, eid: int, root: int) -> int:
    h = delete_edge(g, eid)
    reach = reachable_from(h, root)
    if len(reach) != len(h.vertices):
        h = Digraph._make(tuple(sorted(reach)),
                          tuple(e for e in h.edges if e.src in reach and e.dst in reach),
                          h.names, h.next_vid, True)
    return dominator_tree(h, root).nontrivial_pairs()


def edges_removed_by_contraction(g: Digraph, eid: int) -> int:
    return len(g.edges) - len(contract_edge(g, eid).edges)


def choose_edge(g: Digraph, heuristic: Heuristic = Heuristic.MAX_SCC_SPLIT) -> int:
    """Edge to delete-contract next; ties go to the smallest edge id."""
    root = is_rooted(g) if heuristic is Heuristic.MAX_NEW_DOMINATORS else None
    if root is not None:
        score = lambda e: _dominator_pairs_without(g, e.id, root)  # noqa: E731
    elif heuristic is Heuristic.MAX_EDGE_ELIMINATION:
        score = lambda e: edges_removed_by_contraction(g, e.id)  # noqa: E731
    else:
        counts = scc_counts_without_each_edge(g)
        score = lambda e: counts[e.id]  # noqa: E731
    best, best_score = None, None
    for e in g.edges:
        s = score(e)
        if best_score is None or s > best_score:
            best, best_score = e.id, s
    if best is None:
        raise KirchhoffError("cannot choose an edge in a digraph without edges")
    return best


# ---------------------------------------------------------------------------
# Compression


def canonical_key(g: Digraph):
    """Key equal for digraphs that match up to vertex renaming, labels included.

    Labels are unique per edge, so a vertex is identified by the smallest
    label id among its in-edges.  A digraph with an arborescence has at most
    one vertex without in-edges; it gets -1.
    """
    canon = {}
    for e in g.edges:
        uid = e.label.uid
        c = canon.get(e.dst)
        if c is None or uid < c:
            canon[e.dst] = uid
    return (len(g.vertices),
            frozenset((e.label.uid, canon.get(e.src, -1), canon[e.dst]) for e in g.edges))


class _Compressor:
    def __init__(self, cfg: CompressConfig, trace=None):
        self.cfg = cfg
        self.memo: dict = {}
        self.trace = trace

    def graph(self, g: Digraph, depth: int) -> Optional[Expr]:
        if len(g.vertices) == 1:
            return ex.one()
        if not has_arborescence(g):
            return None
        key = canonical_key(g) if self.cfg.memoize else None
        if key is not None:
            hit = self.memo.get(key)
            if hit is not None:
                return hit
        parts = []
        for f in all_factors(g):
            if f.trivial:
                continue
            parts.append(self.prime(f.component, depth))
        result = ex.mul(*parts)
        if key is not None:
            # insert-if-absent, so concurrent fillers agree on one result
            result = self.memo.setdefault(key, result)
        return result

    def prime(self, f: Digraph, depth: int) -> Expr:
        key = ("prime", canonical_key(f)) if self.cfg.memoize else None
        if key is not None:
            hit = self.memo.get(key)
            if hit is not None:
                return hit
        result = self._prime(f, depth)
        if key is not None:
            # insert-if-absent, so concurrent fillers agree on one result
            result = self.memo.setdefault(key, result)
        return result

    def _prime(self, f: Digraph, depth: int) -> Expr:
        if len(f.vertices) <= self.cfg.expand_threshold:
            return kirchhoff_expr(f)
        if self.cfg.max_depth is not None and depth >= self.cfg.max_depth:
            raise DepthExceededError(depth, f)
        eid = choose_edge(f, self.cfg.heuristic)
        label = f.edge(eid).label
        deleted = self.graph(delete_edge(f, eid), depth + 1)
        contracted = self.graph(contract_edge(f, eid), depth + 1)
        terms = []
        if deleted is not None:
            terms.append(deleted)
        if contracted is not None:
            terms.append(ex.mul(label, contracted))
        if self.trace is not None:
            self.trace.append((f, deleted, contracted, label))
        # a prime factor always has an arborescence, so terms is never empty
        return ex.add(*terms, flatten=False)


def compress(g: Digraph, cfg: Optional[CompressConfig] = None, trace=None) -> Enumerator:
    """Compressed κ(g), or ZERO when g has no arborescence.

    ``trace``, if given, is a list that receives one (factor, deleted,
    contracted, label) tuple per deletion-contraction step.
    """
    cfg = cfg or CompressConfig()
    g = normalize(g)
    result = _Compressor(cfg, trace).graph(g, 0)
    return ZERO if result is None else result


def count_arborescences(g: Digraph, cfg: Optional[CompressConfig] = None) -> int:
    return compress(g, cfg).count


def scc_stage_expr(g: Digraph) -> Enumerator:
    """κ(g) factored by the SCC rule alone, each factor written out in full."""
    g = normalize(g)
    if not has_arborescence(g):
        return ZERO
    parts = []
    for h in scc_factors(g):
        if len(h.vertices) == 1:
            continue
        monos = kirchhoff_monomials(h, cap=len(h.vertices))
        parts.append(ex.add(*(ex.mul(*(ex.var(s) for s in m.symbols)) for m in sorted(monos))))
    return ex.mul(*parts)


# ---------------------------------------------------------------------------
# Reports


@dataclass(frozen=True)
class CompressionReport:
    vertices: int
    edges: int
    scc_count: int
    arborescence_count: int
    expanded_symbol_count: int
    compressed_symbol_count: int

    @property
    def ratio(self) -> float:
        if self.compressed_symbol_count == 0:
            return 1.0 if self.expanded_symbol_count == 0 else float("inf")
        return _big_ratio(self.expanded_symbol_count, self.compressed_symbol_count)

    def ratio_text(self) -> str:
        return _ratio_text(self.expanded_symbol_count, self.compressed_symbol_count)

    def as_dict(self) -> dict:
        return {
            "vertices": self.vertices,
            "edges": self.edges,
            "scc_count": self.scc_count,
            "arborescence_count": self.arborescence_count,
            "expanded_symbol_count": self.expanded_symbol_count,
            "compressed_symbol_count": self.compressed_symbol_count,
            "ratio": self.ratio_text(),
        }


def _big_ratio(num: int, den: int) -> float:
    try:
        return num / den
    except OverflowError:
        return float("inf")


def _ratio_text(num: int, den: int) -> str:
    if den == 0:
        return "1" if num == 0 else "inf"
    q = num // den
    if q < 10**6:
        return f"{num / den:.4g}"
    digits = len(str(q)) - 1
    lead = num * 1000 // (den * 10**digits)
    return f"{lead / 1000:.3f}e+{digits:02d}"


def report(g: Digraph, e: Optional[Enumerator] = None,
           cfg: Optional[CompressConfig] = None) -> CompressionReport:
    g = normalize(g)
    if e is None:
        e = compress(g, cfg)
    if isinstance(e, ZeroEnumerator):
        expanded = compressed = 0
    else:
        metrics = ex.size_metrics(e)
        expanded, compressed = metrics.expanded_symbol_count, metrics.symbol_count
    return CompressionReport(
        vertices=len(g.vertices),
        edges=len(g.edges),
        scc_count=len(scc(g)),
        arborescence_count=e.count,
        expanded_symbol_count=expanded,
        compressed_symbol_count=compressed,
    )


# ---------------------------------------------------------------------------
# Example digraph


def build_figure1_graph() -> Digraph:
    """The 14-vertex chain: a root, a hub and four 3-cycles.

    Root r feeds hub h through edge o.  Block X in a..d is the cycle
    X1: p->q, X2: q->s, X3: s->p, entered at p by X4 and X5.  Block a is
    entered twice from h (a parallel pair); later blocks are entered from the
    q and s of the previous block.  κ = o·∏ X1 X2 (X4 + X5), 16 arborescences.
    """
    triples = [("r", "h", "o")]
    prev = None
    for x in "abcd":
        p, q, s = f"{x}p", f"{x}q", f"{x}s"
        if prev is None:
            sources = ("h", "h")
        else:
            sources = (prev[1], prev[2])
        triples += [
            (p, q, f"{x}1"), (q, s, f"{x}2"), (s, p, f"{x}3"),
            (sources[0], p, f"{x}4"), (sources[1], p, f"{x}5"),
        ]
        prev = (p, q, s)
    return from_edges(triples)
