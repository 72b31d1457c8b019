"""Prime factorization of the Kirchhoff polynomial by digraph decomposition.

Two rules split κ(G) into a product:

* SCC rule: κ(G) is the product of κ(comp(G, V_i)) over the SCCs V_i.
* Domination rule: for G rooted at v, κ(G) is the product over the
  dominator tree of the rooted digraphs each vertex forms with its
  immediately dominated children, after every child's dominated set has
  been contracted into the child.

Applying SCC, then domination, then SCC once more already yields prime
factors; :func:`all_factors` does exactly that.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

from . import expr as ex
from .digraph import (
    Digraph,
    Edge,
    GraphError,
    _comp,
    dominator_tree,
    is_rooted,
    is_strongly_connected,
    merge_parallel,
    normalize,
    require_arborescence,
    to_dot,
)


class Rule(enum.Enum):
    SCC_INITIAL = "scc-initial"
    SCC_NONINITIAL = "scc-noninitial"
    DOMINATION = "domination"
    TRIVIAL = "trivial"


@dataclass(frozen=True)
class Factor:
    component: Digraph
    rule: Rule
    prime: bool
    root: Optional[int]

    @property
    def trivial(self) -> bool:
        return len(self.component.vertices) == 1


@dataclass
class Factorization:
    factors: list[Factor]
    source: Digraph = field(repr=False)

    def __iter__(self):
        return iter(self.factors)

    def __len__(self):
        return len(self.factors)

    def nontrivial(self) -> list[Factor]:
        return [f for f in self.factors if not f.trivial]

    def primes(self) -> list[Digraph]:
        return [f.component for f in self.factors if f.prime]

    def to_json(self) -> dict:
        out = []
        for f in self.factors:
            g = f.component
            out.append({
                "vertices": [g.name(v) for v in g.vertices],
                "edges": [[g.name(e.src), g.name(e.dst), ex.pretty(e.label)] for e in g.edges],
                "rule": f.rule.value,
                "root": None if f.root is None else g.name(f.root),
                "prime": f.prime,
            })
        return {"factors": out, "prime_count": sum(1 for f in self.factors if f.prime)}

    def to_dot(self) -> str:
        body = []
        for i, f in enumerate(self.factors):
            if f.trivial:
                continue
            sub = to_dot(f.component, name=f"factor{i} ({f.rule.value})", cluster=True,
                         prefix=f"f{i}_")
            body.append("\n".join("  " + line for line in sub.splitlines()))
        return "digraph factors {\n" + "\n".join(body) + "\n}"


# ---------------------------------------------------------------------------
# SCC rule


def _scc_split(g: Digraph) -> list[tuple[Digraph, bool]]:
    """comp(G, V_i) for every SCC in topological order, flagged initial or not."""
    part = require_arborescence(g)
    if len(part.components) == 1:
        return [(g, True)]
    initial = part.initial[0]
    comp_of = part.component_of
    k = len(part.components)
    internal: list[list[Edge]] = [[] for _ in range(k)]
    external: list[list[Edge]] = [[] for _ in range(k)]
    for e in g.edges:
        a, b = comp_of[e.src], comp_of[e.dst]
        (internal if a == b else external)[b].append(e)
    aux = g.next_vid
    names = g.names
    out = []
    for ci, members in enumerate(part.components):
        if ci == initial:
            out.append((Digraph._make(members, tuple(internal[ci]), names, g.next_vid, True), True))
            continue
        edges = internal[ci] + [Edge(e.id, aux, e.dst, e.label) for e in external[ci]]
        if len(external[ci]) > 1:
            edges = merge_parallel(edges)
        else:
            edges.sort(key=lambda e: e.id)
            edges = tuple(edges)
        out.append((Digraph._make(members + (aux,), edges, names, aux + 1, True), False))
    return out


def scc_factors(g: Digraph) -> list[Digraph]:
    """Components whose Kirchhoff polynomials multiply to κ(g).

    Raises NoArborescenceError unless the condensation has a single source.
    """
    return [h for h, _ in _scc_split(normalize(g))]


def comp_renames_only(g: Digraph) -> bool:
    """True when SCC splitting ``g`` only renames its root.

    This happens when the initial SCC is one vertex v and G - v is strongly
    connected: comp(G, V - {v}) is G with v turned into an auxiliary vertex.
    """
    part = require_arborescence(normalize(g))
    return len(part.components) == 2 and len(part.components[part.initial[0]]) == 1


# ---------------------------------------------------------------------------
# Domination rule


def domination_factors(g: Digraph) -> list[Digraph]:
    """Factors from the dominator tree; ``[g]`` itself when g is not rooted.

    Vertices are visited in postorder of the dominator tree.  At vertex u
    the factor is the subdigraph induced on u and its children in the
    running contracted digraph, with the in-edges of u removed; afterwards
    the children are contracted into u.  The running contraction is kept
    as a union-find over original vertices instead of rebuilding digraphs.
    """
    g = normalize(g)
    root = is_rooted(g)
    if root is None:
        return [g]
    tree = dominator_tree(g, root)
    rep = {v: v for v in g.vertices}

    def find(x):
        while rep[x] != x:
            rep[x] = rep[rep[x]]
            x = rep[x]
        return x

    names, next_vid = g.names, g.next_vid
    factors = []
    for u in tree.postorder():
        kids = tree.children[u]
        if not kids:
            factors.append(Digraph._make((u,), (), names, next_vid, True))
            continue
        edges = []
        merged = False
        for c in kids:
            seen_src = set()
            for e in g.in_edges(c):
                s = find(e.src)
                if s == c:
                    continue
                if s != e.src:
                    e = Edge(e.id, s, c, e.label)
                if s in seen_src:
                    merged = True
                seen_src.add(s)
                edges.append(e)
        if merged:
            edges = merge_parallel(edges)
        else:
            edges.sort(key=lambda e: e.id)
            edges = tuple(edges)
        vs = tuple(sorted((u,) + kids))
        factors.append(Digraph._make(vs, edges, names, next_vid, True))
        for c in kids:
            rep[c] = u
    return factors


# ---------------------------------------------------------------------------
# Primality and the full pipeline


def is_prime_component(g: Digraph) -> bool:
    """Structural primality certificate.

    True when g is strongly connected, or g is rooted at some v with G - v
    strongly connected and no non-trivial dominators.  These conditions are
    sufficient; every factor produced by :func:`all_factors` meets one.
    """
    g = normalize(g)
    if len(g.vertices) < 2:
        raise GraphError("primality is undefined for a single-vertex digraph")
    if is_strongly_connected(g):
        return True
    root = is_rooted(g)
    if root is None:
        return False
    rest = Digraph._make(tuple(v for v in g.vertices if v != root),
                         tuple(e for e in g.edges if e.src != root), g.names, g.next_vid, True)
    if not is_strongly_connected(rest):
        return False
    return dominator_tree(g, root).is_flat()


def _nontrivial_count(graphs) -> int:
    return sum(1 for h in graphs if len(h.vertices) > 1)


def all_factors(g: Digraph) -> Factorization:
    """SCC rule, then domination rule, then SCC rule again.

    Every non-trivial output factor is prime.  Single-vertex factors (κ = 1)
    are kept and flagged so the product over the list is exactly κ(g).
    A factor's rule is the last rule that actually split something on the
    way to it.
    """
    source = g
    g = normalize(g)
    factors: list[Factor] = []
    for g1, initial in _scc_split(g):
        rule1 = Rule.SCC_INITIAL if initial else Rule.SCC_NONINITIAL
        if len(g1.vertices) == 1:
            factors.append(Factor(g1, Rule.TRIVIAL, False, None))
            continue
        if not initial and _aux_feeds_all(g1):
            # the SCC with its auxiliary source: already prime
            factors.append(Factor(g1, rule1, True, _aux_root(g1)))
            continue
        stage2 = domination_factors(g1)
        rule2 = Rule.DOMINATION if _nontrivial_count(stage2) > 1 else rule1
        for g2 in stage2:
            if len(g2.vertices) == 1:
                factors.append(Factor(g2, Rule.TRIVIAL, False, None))
                continue
            stage3 = _scc_split(g2)
            split3 = _nontrivial_count(h for h, _ in stage3) > 1
            for g3, init3 in stage3:
                if len(g3.vertices) == 1:
                    factors.append(Factor(g3, Rule.TRIVIAL, False, None))
                    continue
                if split3:
                    rule = Rule.SCC_INITIAL if init3 else Rule.SCC_NONINITIAL
                else:
                    rule = rule2
                root = None if init3 else _aux_root(g3)
                factors.append(Factor(g3, rule, True, root))
    return Factorization(factors, source)


def _aux_feeds_all(g: Digraph) -> bool:
    # every vertex has an edge from the source, so the dominator tree is flat
    aux = _aux_root(g)
    fed = {e.dst for e in g.edges if e.src == aux}
    return len(fed) == len(g.vertices) - 1


def _aux_root(g: Digraph) -> int:
    # a non-initial comp is rooted at its auxiliary vertex, the largest id
    return g.vertices[-1]
