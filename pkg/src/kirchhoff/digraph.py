"""Labeled digraphs and the structural primitives the factorization needs.

Vertices and edges are dense integers.  Vertex names read from input files
live in a side table shared by every digraph derived from the parsed one;
auxiliary vertices created later are named ``aux<id>``.  Each edge carries a
label expression, normally a single variable, or a sum of variables once
parallel edges have been merged.

A :class:`Digraph` is immutable.  Every operation returns a new value.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple, Optional, Sequence

from . import expr as ex
from .errors import KirchhoffError, NoArborescenceError
from .expr import Expr


class Edge(NamedTuple):
    id: int
    src: int
    dst: int
    label: Expr


class GraphError(KirchhoffError):
    pass


class Digraph:
    """Immutable labeled multidigraph.

    ``next_vid`` is the smallest vertex id that is free in this digraph's
    whole lineage; auxiliary vertices are allocated from it so that
    re-decomposing a factor never reuses an id already in play.
    """

    __slots__ = ("vertices", "edges", "names", "next_vid", "normal",
                 "_in", "_out", "_vset", "_by_id")

    def __init__(self, vertices: Iterable[int], edges: Iterable[Edge],
                 names: Optional[Mapping[int, str]] = None,
                 next_vid: Optional[int] = None):
        vs = tuple(sorted(set(vertices)))
        es = tuple(sorted((Edge(*e) for e in edges), key=lambda e: e.id))
        vset = frozenset(vs)
        seen = set()
        for e in es:
            if e.id in seen:
                raise GraphError(f"duplicate edge id {e.id}")
            seen.add(e.id)
            if e.src not in vset or e.dst not in vset:
                raise GraphError(f"edge {e.id} has an endpoint outside the vertex set")
        bound = (vs[-1] + 1) if vs else 0
        self._init(vs, es, names if names is not None else {},
                   max(bound, next_vid or 0), None)
        self._vset = vset

    def _init(self, vertices, edges, names, next_vid, normal):
        self.vertices = vertices
        self.edges = edges
        self.names = names
        self.next_vid = next_vid
        self.normal = normal
        self._in = None
        self._out = None
        self._vset = None
        self._by_id = None

    @classmethod
    def _make(cls, vertices: tuple, edges: tuple, names, next_vid: int,
              normal: Optional[bool] = None) -> "Digraph":
        # trusted constructor: vertices sorted, edges sorted by id, ids valid
        g = cls.__new__(cls)
        g._init(vertices, edges, names, next_vid, normal)
        return g

    # -- basic queries -------------------------------------------------------

    def __len__(self):
        return len(self.vertices)

    def __eq__(self, other):
        if not isinstance(other, Digraph):
            return NotImplemented
        return self.vertices == other.vertices and self.edges == other.edges

    def __hash__(self):
        return hash((self.vertices, tuple((e.id, e.src, e.dst, e.label.uid) for e in self.edges)))

    def __repr__(self):
        return f"Digraph(|V|={len(self.vertices)}, |E|={len(self.edges)})"

    @property
    def vertex_set(self) -> frozenset:
        if self._vset is None:
            self._vset = frozenset(self.vertices)
        return self._vset

    def _build_adjacency(self):
        ins = {v: [] for v in self.vertices}
        outs = {v: [] for v in self.vertices}
        for e in self.edges:
            ins[e.dst].append(e)
            outs[e.src].append(e)
        self._in = ins
        self._out = outs

    def in_edges(self, v: int) -> list[Edge]:
        if self._in is None:
            self._build_adjacency()
        return self._in[v]

    def out_edges(self, v: int) -> list[Edge]:
        if self._out is None:
            self._build_adjacency()
        return self._out[v]

    def edge(self, eid: int) -> Edge:
        if self._by_id is None:
            self._by_id = {e.id: e for e in self.edges}
        try:
            return self._by_id[eid]
        except KeyError:
            raise GraphError(f"unknown edge id {eid}") from None

    def has_edge_id(self, eid: int) -> bool:
        if self._by_id is None:
            self._by_id = {e.id: e for e in self.edges}
        return eid in self._by_id

    def name(self, v: int) -> str:
        name = self.names.get(v)
        return name if name is not None else f"aux{v}"

    def vertex_by_name(self, name: str) -> int:
        for v in self.vertices:
            if self.name(v) == name:
                return v
        raise GraphError(f"unknown vertex {name!r}")

    def edge_by_label(self, label: str) -> Edge:
        for e in self.edges:
            if e.label.kind == ex.VAR and e.label.symbol == label:
                return e
        raise GraphError(f"no edge labeled {label!r}")

    def labels(self) -> frozenset[str]:
        """All variable symbols occurring in edge labels."""
        out = set()
        for e in self.edges:
            if e.label.kind == ex.VAR:
                out.add(e.label.symbol)
            else:
                out |= ex.variables(e.label)
        return frozenset(out)

    def describe(self) -> str:
        return ", ".join(
            f"{self.name(e.src)}->{self.name(e.dst)}:{ex.pretty(e.label)}" for e in self.edges
        ) or "no edges"

    def with_edges(self, edges: Iterable[Edge], normal: Optional[bool] = None) -> "Digraph":
        return Digraph._make(self.vertices, tuple(sorted(edges, key=lambda e: e.id)),
                             self.names, self.next_vid, normal)


# ---------------------------------------------------------------------------
# Construction helpers


def from_edges(triples: Iterable[Sequence], vertices: Iterable[str] = ()) -> Digraph:
    """Build a digraph from ``(source, target, label)`` name triples.

    Vertices get ids in order of first appearance; edge ids follow the input
    order.  The result is not normalized.
    """
    ids: dict[str, int] = {}
    for name in vertices:
        ids.setdefault(name, len(ids))
    edges = []
    seen_labels = set()
    for k, (src, dst, label) in enumerate(triples):
        for name in (src, dst):
            ids.setdefault(name, len(ids))
        if label in seen_labels:
            raise GraphError(f"label {label!r} used on more than one edge")
        seen_labels.add(label)
        edges.append(Edge(k, ids[src], ids[dst], ex.var(label)))
    if not ids:
        raise GraphError("empty digraph")
    names = {v: n for n, v in ids.items()}
    return Digraph(range(len(ids)), edges, names)


def parse_edge_list(text: str) -> Digraph:
    """Parse the line-oriented ``source target [label]`` format.

    ``#`` starts a comment.  A missing label becomes ``e<k>`` where k is the
    1-based position of the edge among the edge lines.  A line holding a
    single token declares an isolated vertex.
    """
    triples = []
    order = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) > 3:
            raise GraphError(f"line {lineno}: expected 'source target [label]'")
        order.extend(parts[:2])
        if len(parts) == 1:
            continue
        label = parts[2] if len(parts) == 3 else f"e{len(triples) + 1}"
        triples.append((parts[0], parts[1], label))
    return from_edges(triples, vertices=order)


def format_edge_list(g: Digraph) -> str:
    lines = []
    for e in g.edges:
        lines.append(f"{g.name(e.src)} {g.name(e.dst)} {ex.pretty(e.label).replace(' ', '')}")
    touched = {e.src for e in g.edges} | {e.dst for e in g.edges}
    for v in g.vertices:
        if v not in touched:
            lines.append(g.name(v))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Normalization


def merge_parallel(edges: Iterable[Edge]) -> tuple[Edge, ...]:
    """Drop loops and merge parallel bundles into one edge per vertex pair.

    A merged edge keeps the smallest id of its bundle and is labeled with the
    sum of the bundle's labels, taken in edge-id order.
    """
    bundles: dict[tuple[int, int], list[Edge]] = {}
    for e in edges:
        if e.src != e.dst:
            bundles.setdefault((e.src, e.dst), []).append(e)
    out = []
    for bundle in bundles.values():
        if len(bundle) == 1:
            out.append(bundle[0])
        else:
            bundle.sort(key=lambda e: e.id)
            first = bundle[0]
            out.append(Edge(first.id, first.src, first.dst,
                            ex.add(*(e.label for e in bundle))))
    out.sort(key=lambda e: e.id)
    return tuple(out)


def is_normal(g: Digraph) -> bool:
    if g.normal is not None:
        return g.normal
    pairs = set()
    for e in g.edges:
        if e.src == e.dst or (e.src, e.dst) in pairs:
            g.normal = False
            return False
        pairs.add((e.src, e.dst))
    g.normal = True
    return True


def normalize(g: Digraph) -> Digraph:
    """Remove loops and merge parallel edges; κ is unchanged."""
    if is_normal(g):
        return g
    return Digraph._make(g.vertices, merge_parallel(g.edges), g.names, g.next_vid, True)


def transpose(g: Digraph) -> Digraph:
    return g.with_edges((Edge(e.id, e.dst, e.src, e.label) for e in g.edges), g.normal)


# ---------------------------------------------------------------------------
# Strongly connected components


@dataclass(frozen=True)
class SccPartition:
    """SCCs listed in a topological order of the condensation."""

    components: tuple[tuple[int, ...], ...]
    component_of: Mapping[int, int]
    condensation: Mapping[int, frozenset[int]]
    initial: tuple[int, ...]

    def __len__(self):
        return len(self.components)


def _tarjan(n: int, succ: list[list[int]]) -> list[list[int]]:
    """Iterative Tarjan; components come out in reverse topological order."""
    index = [-1] * n
    low = [0] * n
    onstack = [False] * n
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = 0
    for s in range(n):
        if index[s] != -1:
            continue
        index[s] = low[s] = counter
        counter += 1
        stack.append(s)
        onstack[s] = True
        work = [(s, iter(succ[s]))]
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    onstack[w] = True
                    work.append((w, iter(succ[w])))
                    advanced = True
                    break
                if onstack[w] and index[w] < low[v]:
                    low[v] = index[w]
            if advanced:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                if low[v] < low[u]:
                    low[u] = low[v]
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    onstack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comps.append(comp)
    return comps


def _local_index(g: Digraph):
    vs = g.vertices
    pos = {v: i for i, v in enumerate(vs)}
    succ: list[list[int]] = [[] for _ in vs]
    for e in g.edges:
        succ[pos[e.src]].append(pos[e.dst])
    return pos, succ


def scc(g: Digraph) -> SccPartition:
    """Maximal strongly connected components, condensation and initial SCCs."""
    pos, succ = _local_index(g)
    vs = g.vertices
    raw = _tarjan(len(vs), succ)
    raw.reverse()
    components = tuple(tuple(sorted(vs[i] for i in comp)) for comp in raw)
    component_of = {}
    for ci, comp in enumerate(components):
        for v in comp:
            component_of[v] = ci
    cond: dict[int, set[int]] = {ci: set() for ci in range(len(components))}
    has_pred = [False] * len(components)
    for e in g.edges:
        a, b = component_of[e.src], component_of[e.dst]
        if a != b:
            cond[a].add(b)
            has_pred[b] = True
    initial = tuple(ci for ci in range(len(components)) if not has_pred[ci])
    return SccPartition(components, component_of,
                        {k: frozenset(v) for k, v in cond.items()}, initial)


def scc_counts_without_each_edge(g: Digraph) -> dict[int, int]:
    """Number of SCCs of ``g`` minus e, for every edge e, keyed by edge id."""
    pos = {v: i for i, v in enumerate(g.vertices)}
    n = len(g.vertices)
    arcs = [(e.id, pos[e.src], pos[e.dst]) for e in g.edges]
    out = {}
    for skip, _, _ in arcs:
        succ: list[list[int]] = [[] for _ in range(n)]
        for eid, a, b in arcs:
            if eid != skip:
                succ[a].append(b)
        out[skip] = len(_tarjan(n, succ))
    return out


def is_strongly_connected(g: Digraph) -> bool:
    if len(g.vertices) <= 1:
        return True
    pos, succ = _local_index(g)
    return len(_tarjan(len(g.vertices), succ)) == 1


def has_arborescence(g: Digraph) -> bool:
    return len(scc(g).initial) == 1


# ---------------------------------------------------------------------------
# Rooting and reachability


def root_at(g: Digraph, v: int) -> Digraph:
    """Remove every edge entering ``v``."""
    if v not in g.vertex_set:
        raise GraphError(f"unknown vertex {v}")
    if not g.in_edges(v):
        return g
    return g.with_edges((e for e in g.edges if e.dst != v), g.normal)


def reachable_from(g: Digraph, root: int) -> set[int]:
    seen = {root}
    stack = [root]
    while stack:
        u = stack.pop()
        for e in g.out_edges(u):
            if e.dst not in seen:
                seen.add(e.dst)
                stack.append(e.dst)
    return seen


def is_rooted(g: Digraph) -> Optional[int]:
    """The vertex ``g`` is rooted at, or None.

    A digraph is rooted at v when v has no incoming edge and reaches every
    other vertex.  At most one vertex can qualify.
    """
    sources = [v for v in g.vertices if not g.in_edges(v)]
    if len(sources) != 1:
        return None
    root = sources[0]
    if len(reachable_from(g, root)) != len(g.vertices):
        return None
    return root


# ---------------------------------------------------------------------------
# Dominator tree


@dataclass(frozen=True)
class DominatorTree:
    root: int
    parent: Mapping[int, int]
    children: Mapping[int, tuple[int, ...]]

    def postorder(self) -> list[int]:
        out = []
        stack = [(self.root, False)]
        while stack:
            v, done = stack.pop()
            if done:
                out.append(v)
                continue
            stack.append((v, True))
            for c in reversed(self.children[v]):
                stack.append((c, False))
        return out

    def dominated(self, u: int) -> set[int]:
        """dom(u): every vertex whose root paths all pass through ``u``."""
        out = {u}
        stack = [u]
        while stack:
            for c in self.children[stack.pop()]:
                out.add(c)
                stack.append(c)
        return out

    def dominates(self, u: int, w: int) -> bool:
        while True:
            if w == u:
                return True
            if w == self.root:
                return False
            w = self.parent[w]

    def is_flat(self) -> bool:
        """No vertex other than the root dominates anything besides itself."""
        return all(p == self.root for p in self.parent.values())

    def nontrivial_pairs(self) -> int:
        """Number of pairs (u, w), u != w, u not the root, with u dominating w."""
        size = {}
        total = 0
        for v in self.postorder():
            size[v] = 1 + sum(size[c] for c in self.children[v])
            if v != self.root:
                total += size[v] - 1
        return total


def _immediate_dominators(n: int, succ: list[list[int]], pred: list[list[int]],
                          root: int) -> list[int]:
    """Lengauer–Tarjan with path compression (the "simple" variant).

    Works in DFS preorder numbers internally.  Returns idom per local index,
    -1 for the root and for unreachable vertices.
    """
    dfnum = [-1] * n
    order: list[int] = []
    parent = [-1] * n
    dfnum[root] = 0
    order.append(root)
    work = [(root, iter(succ[root]))]
    while work:
        v, it = work[-1]
        for w in it:
            if dfnum[w] == -1:
                dfnum[w] = len(order)
                order.append(w)
                parent[dfnum[w]] = dfnum[v]
                work.append((w, iter(succ[w])))
                break
        else:
            work.pop()
    m = len(order)
    # everything below is indexed by DFS number
    semi = list(range(m))
    label = list(range(m))
    ancestor = [-1] * m
    idom = [-1] * m
    bucket: list[list[int]] = [[] for _ in range(m)]

    def evaluate(v):
        if ancestor[v] == -1:
            return v
        chain = []
        u = v
        while ancestor[ancestor[u]] != -1:
            chain.append(u)
            u = ancestor[u]
        while chain:
            u = chain.pop()
            a = ancestor[u]
            if semi[label[a]] < semi[label[u]]:
                label[u] = label[a]
            ancestor[u] = ancestor[a]
        return label[v]

    for w in range(m - 1, 0, -1):
        for pv in pred[order[w]]:
            v = dfnum[pv]
            if v == -1:
                continue
            u = evaluate(v)
            if semi[u] < semi[w]:
                semi[w] = semi[u]
        bucket[semi[w]].append(w)
        p = parent[w]
        ancestor[w] = p
        for v in bucket[p]:
            u = evaluate(v)
            idom[v] = u if semi[u] < semi[v] else p
        bucket[p] = []
    for w in range(1, m):
        if idom[w] != semi[w]:
            idom[w] = idom[idom[w]]
    result = [-1] * n
    for w in range(1, m):
        result[order[w]] = order[idom[w]]
    return result


def dominator_tree(g: Digraph, root: int) -> DominatorTree:
    if root not in g.vertex_set:
        raise GraphError(f"unknown vertex {root}")
    vs = g.vertices
    pos = {v: i for i, v in enumerate(vs)}
    succ: list[list[int]] = [[] for _ in vs]
    pred: list[list[int]] = [[] for _ in vs]
    for e in g.edges:
        a, b = pos[e.src], pos[e.dst]
        succ[a].append(b)
        pred[b].append(a)
    idom = _immediate_dominators(len(vs), succ, pred, pos[root])
    parent = {}
    children: dict[int, list[int]] = {v: [] for v in vs}
    r = pos[root]
    for i, d in enumerate(idom):
        if i == r:
            continue
        if d == -1:
            raise GraphError(f"vertex {g.name(vs[i])} is unreachable from the root")
        parent[vs[i]] = vs[d]
        children[vs[d]].append(vs[i])
    # vertices are visited in ascending order, so child lists are sorted
    return DominatorTree(root, parent, {v: tuple(c) for v, c in children.items()})


# ---------------------------------------------------------------------------
# comp, contraction, deletion


def induced(g: Digraph, vertices: Iterable[int]) -> Digraph:
    keep = frozenset(vertices)
    return Digraph._make(tuple(sorted(keep)),
                         tuple(e for e in g.edges if e.src in keep and e.dst in keep),
                         g.names, g.next_vid, g.normal)


def comp(g: Digraph, component: Iterable[int]) -> Digraph:
    """The digraph an SCC contributes to the SCC factorization.

    The initial SCC is returned as its induced subdigraph.  Any other SCC
    gets one new vertex that takes over every edge entering the SCC from
    outside, keeping the edge's id and label.  Parallel edges that this
    creates are merged.
    """
    part = scc(g)
    members = frozenset(component)
    ci = part.component_of.get(next(iter(members))) if members else None
    if ci is None or frozenset(part.components[ci]) != members:
        raise GraphError("vertex set is not a strongly connected component")
    return _comp(g, members)


def _comp(g: Digraph, members: frozenset) -> Digraph:
    internal = []
    external = []
    for e in g.edges:
        if e.dst in members:
            (internal if e.src in members else external).append(e)
    vs = tuple(sorted(members))
    if not external:
        return Digraph._make(vs, tuple(internal), g.names, g.next_vid, g.normal)
    aux = g.next_vid
    edges = internal + [Edge(e.id, aux, e.dst, e.label) for e in external]
    return Digraph._make((aux,) + vs if aux < vs[0] else vs + (aux,),
                         merge_parallel(edges), g.names, aux + 1, True)


def contract(g: Digraph, group: Iterable[int], u: int) -> Digraph:
    """G(S -> u): drop edges entering S - {u} from outside, drop edges inside S,
    then merge S into u.  The result may have parallel outgoing edges at u.
    """
    s = frozenset(group)
    if u not in s:
        raise GraphError("contraction target must belong to the contracted set")
    if not s <= g.vertex_set:
        raise GraphError("contracted set contains unknown vertices")
    if len(s) == 1:
        return g
    edges = []
    for e in g.edges:
        src_in, dst_in = e.src in s, e.dst in s
        if dst_in:
            if src_in or e.dst != u:
                continue
            edges.append(e)
        elif src_in:
            edges.append(e if e.src == u else Edge(e.id, u, e.dst, e.label))
        else:
            edges.append(e)
    vs = tuple(v for v in g.vertices if v not in s or v == u)
    return Digraph._make(vs, tuple(edges), g.names, g.next_vid, None)


def delete_edge(g: Digraph, eid: int) -> Digraph:
    g.edge(eid)
    return g.with_edges((e for e in g.edges if e.id != eid), g.normal)


def contract_edge(g: Digraph, eid: int) -> Digraph:
    """Merge the head of edge ``eid`` into its tail, then normalize."""
    e = g.edge(eid)
    return normalize(contract(g, (e.src, e.dst), e.src))


def require_arborescence(g: Digraph) -> SccPartition:
    part = scc(g)
    if len(part.initial) != 1:
        raise NoArborescenceError(len(part.initial))
    return part


# ---------------------------------------------------------------------------
# DOT export


def _dot_id(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(g: Digraph, name: str = "G", cluster: bool = False, prefix: str = "") -> str:
    kind = "subgraph" if cluster else "digraph"
    lines = [f"{kind} {_dot_id(('cluster_' if cluster else '') + name)} {{"]
    if cluster:
        lines.append(f"  label={_dot_id(name)};")
    for v in g.vertices:
        lines.append(f"  {_dot_id(prefix + str(v))} [label={_dot_id(g.name(v))}];")
    for e in g.edges:
        lines.append(f"  {_dot_id(prefix + str(e.src))} -> {_dot_id(prefix + str(e.dst))}"
                     f" [label={_dot_id(ex.pretty(e.label))}];")
    lines.append("}")
    return "\n".join(lines)


def dominator_tree_to_dot(g: Digraph, tree: DominatorTree, name: str = "T") -> str:
    lines = [f"digraph {_dot_id(name)} {{"]
    for v in tree.children:
        lines.append(f"  {_dot_id(str(v))} [label={_dot_id(g.name(v))}];")
    for v, p in sorted(tree.parent.items()):
        lines.append(f"  {_dot_id(str(p))} -> {_dot_id(str(v))};")
    lines.append("}")
    return "\n".join(lines)
