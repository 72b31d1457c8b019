"""Uses of the compressed form: GCD, uniform sampling, and PE digraph generation."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional, Sequence

from . import expr as ex
from .decompose import all_factors
from .digraph import Digraph, GraphError, from_edges, normalize, require_arborescence
from .engine import CompressConfig, ZeroEnumerator, _Compressor
from .errors import KirchhoffError
from .expr import Expr, Monomial


# ---------------------------------------------------------------------------
# Random digraphs


def random_digraph(n: int, p: float, rng: random.Random, prefix: str = "x") -> Digraph:
    """Each ordered pair of distinct vertices gets an edge with probability p.

    Vertices are ``v0..v{n-1}``; labels are ``{prefix}{k}`` in edge order.
    """
    names = [f"v{i}" for i in range(n)]
    triples = []
    for i in range(n):
        for j in range(n):
            if i != j and rng.random() < p:
                triples.append((names[i], names[j], f"{prefix}{len(triples)}"))
    return from_edges(triples, vertices=names)


# ---------------------------------------------------------------------------
# GCD


@dataclass(frozen=True)
class GcdResult:
    expr: Expr
    exact: bool
    matched: int


def _prime_exprs(g: Digraph, cfg: CompressConfig) -> list[Expr]:
    g = normalize(g)
    require_arborescence(g)
    comp = _Compressor(cfg)
    return [comp.prime(f.component, 0) for f in all_factors(g) if not f.trivial]


def kirchhoff_gcd(g1: Digraph, g2: Digraph, cfg: Optional[CompressConfig] = None,
                  cap: int = 10**4) -> GcdResult:
    """Greatest common divisor of κ(g1) and κ(g2), built from shared prime factors.

    Both digraphs must label edges from one namespace: a prime can only be
    shared when the same labels appear in both.  Primes are matched by
    poly_equal, which compares expansions up to ``cap`` monomials and falls
    back to random evaluation beyond that; ``exact`` is False if any match
    relied on the fallback.

    Raises NoArborescenceError if either input has no arborescence.
    """
    cfg = cfg or CompressConfig()
    left = _prime_exprs(g1, cfg)
    right = _prime_exprs(g2, cfg)
    buckets: dict[frozenset, list[Expr]] = {}
    for e in right:
        buckets.setdefault(ex.variables(e), []).append(e)
    shared = []
    exact = True
    for e in left:
        pool = buckets.get(ex.variables(e))
        if not pool:
            continue
        for i, other in enumerate(pool):
            if other is e:
                verdict = ex.Equality(True, True)
            else:
                verdict = ex.poly_equal(e, other, cap=cap)
            if verdict.equal:
                exact = exact and verdict.exact
                shared.append(e)
                del pool[i]
                break
    return GcdResult(ex.mul(*shared), exact, len(shared))


# ---------------------------------------------------------------------------
# Sampling


def sample_arborescence(e, rng: random.Random) -> Monomial:
    """One monomial of ``e``, uniformly at random.

    At a sum the child is picked with probability proportional to its
    monomial count, using one exact integer draw; at a product every child
    is sampled.  ``e`` must have coefficient-1 monomials, as compress output
    does.
    """
    if isinstance(e, ZeroEnumerator):
        raise KirchhoffError("cannot sample from a polynomial without monomials")
    symbols = []
    stack = [e]
    while stack:
        node = stack.pop()
        kind = node.kind
        if kind == ex.VAR:
            symbols.append(node.symbol)
        elif kind == ex.PROD:
            stack.extend(node.args)
        elif kind == ex.SUM:
            r = rng.randrange(node.count)
            for child in node.args:
                if r < child.count:
                    stack.append(child)
                    break
                r -= child.count
    return Monomial(tuple(sorted(symbols)))


# ---------------------------------------------------------------------------
# PE digraphs


def pe_compose(parent: Digraph, core: Digraph, p: str,
               entries: Optional[Sequence[str]] = None,
               entry_labels: Optional[Sequence[str]] = None) -> Digraph:
    """Hang ``core`` below vertex ``p`` of ``parent``.

    A fresh edge runs from p to each entry vertex of the core (by default
    every core vertex), so the whole core is dominated by p and
    κ(result) = κ(parent) · κ(core with p as its source).  Vertex names and
    labels of the two digraphs must be disjoint.  Labels must be variables.
    """
    pnames = {parent.name(v) for v in parent.vertices}
    if p not in pnames:
        raise GraphError(f"attachment vertex {p!r} is not in the parent digraph")
    cnames = [core.name(v) for v in core.vertices]
    if pnames.intersection(cnames):
        raise GraphError("parent and core share vertex names")
    if entries is None:
        entries = cnames
    else:
        unknown = set(entries) - set(cnames)
        if unknown:
            raise GraphError(f"entry vertices not in the core: {sorted(unknown)}")
    if entry_labels is None:
        entry_labels = [f"{p}>{v}" for v in entries]
    elif len(entry_labels) != len(entries):
        raise GraphError("need one label per entry vertex")
    triples = [(parent.name(e.src), parent.name(e.dst), _atomic(e.label)) for e in parent.edges]
    triples += [(core.name(e.src), core.name(e.dst), _atomic(e.label)) for e in core.edges]
    triples += [(p, v, lab) for v, lab in zip(entries, entry_labels)]
    vertices = [parent.name(v) for v in parent.vertices] + cnames
    return from_edges(triples, vertices=vertices)


def _atomic(label: Expr) -> str:
    if label.kind != ex.VAR:
        raise GraphError("pe_compose needs single-variable edge labels")
    return label.symbol


# Small cores whose composition under a vertex is prime.  Each entry lists
# (vertex count, edges as index pairs).
BASES = {
    "cycle2": (2, [(0, 1), (1, 0)]),
    "cycle3": (3, [(0, 1), (1, 2), (2, 0)]),
    "cycle4": (4, [(0, 1), (1, 2), (2, 3), (3, 0)]),
    "bidir3": (3, [(0, 1), (1, 0), (1, 2), (2, 1), (2, 0), (0, 2)]),
}
DEFAULT_BASES = ("cycle2", "cycle3", "cycle4", "bidir3")


def base_core(kind: str, tag: str) -> list[tuple[str, str, str]]:
    """Edge triples of a base core with vertices ``{tag}v<k>`` and labels ``{tag}e<k>``."""
    try:
        _, pairs = BASES[kind]
    except KeyError:
        raise GraphError(f"unknown base component {kind!r}") from None
    return [(f"{tag}v{a}", f"{tag}v{b}", f"{tag}e{k}") for k, (a, b) in enumerate(pairs)]


@dataclass(frozen=True)
class PeSpec:
    depth: int
    width: int
    bases: tuple = DEFAULT_BASES
    seed: int = 0

    def __post_init__(self):
        if self.depth < 1 or self.width < 1:
            raise ValueError("depth and width must be at least 1")
        if not self.bases:
            raise ValueError("need at least one base component")
        for b in self.bases:
            if b not in BASES:
                raise ValueError(f"unknown base component {b!r}")

    @property
    def prime_count(self) -> int:
        return sum(self.width ** i for i in range(1, self.depth + 1))


@dataclass
class PeDigraph:
    graph: Digraph
    manifest: dict = field(repr=False)


def pe_generate(spec: PeSpec) -> PeDigraph:
    """Build a PE digraph as a tree of prime components.

    Level 1 hangs ``width`` cores below a root vertex ``r``.  Every core of
    level i gets ``width`` children at level i+1, each attached below one of
    its vertices chosen at random.  Each core is joined by one fresh edge to
    each of its vertices, which makes every core its own prime factor, so
    the digraph has width + width² + ... + width^depth of them.
    """
    rng = random.Random(spec.seed)
    triples: list[tuple[str, str, str]] = []
    components = []
    frontier: list[list[str]] = [["r"]]
    uid = 0
    for level in range(1, spec.depth + 1):
        nxt = []
        for parent_vertices in frontier:
            for _ in range(spec.width):
                kind = spec.bases[rng.randrange(len(spec.bases))]
                tag = f"c{uid}"
                uid += 1
                attach = parent_vertices[rng.randrange(len(parent_vertices))]
                core = base_core(kind, tag)
                n = BASES[kind][0]
                vertices = [f"{tag}v{k}" for k in range(n)]
                entry = [(attach, v, f"{tag}i{k}") for k, v in enumerate(vertices)]
                triples += core
                triples += entry
                components.append({
                    "id": tag,
                    "level": level,
                    "base": kind,
                    "attach": attach,
                    "vertices": vertices,
                    "edges": [list(t) for t in core],
                    "entries": [list(t) for t in entry],
                })
                nxt.append(vertices)
        frontier = nxt
    graph = from_edges(triples, vertices=["r"])
    manifest = {
        "depth": spec.depth,
        "width": spec.width,
        "bases": list(spec.bases),
        "seed": spec.seed,
        "prime_count": len(components),
        "components": components,
    }
    return PeDigraph(graph, manifest)


def manifest_component(entry: dict) -> Digraph:
    """The prime factor a manifest entry describes: its core plus the attachment vertex."""
    triples = [tuple(t) for t in entry["entries"]] + [tuple(t) for t in entry["edges"]]
    return from_edges(triples, vertices=[entry["attach"]])
