"""Ground truth for arborescences: brute-force enumeration and matrix-tree counts.

Nothing here uses the factorization or deletion-contraction code, so these
functions can serve as an independent check on both.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import expr as ex
from .digraph import Digraph, normalize, scc
from .errors import CapExceededError

DEFAULT_VERTEX_CAP = 10


@dataclass(frozen=True)
class ArborescenceSet:
    """Arborescences as (root, edge-id set) pairs."""

    graph: Digraph
    members: tuple[tuple[int, frozenset[int]], ...]

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def label_sets(self) -> frozenset[frozenset[str]]:
        """Each arborescence as the set of its edge labels.

        Only meaningful when every label is a single variable.
        """
        g = self.graph
        return frozenset(frozenset(g.edge(i).label.symbol for i in ids) for _, ids in self.members)


def is_acyclic_selection(root: int, vertices, edges) -> bool:
    """Kahn-style peeling from ``root`` over the selected edges.

    ``edges`` must give every vertex except ``root`` exactly one in-edge; the
    selection is then an arborescence iff peeling reaches every vertex.
    """
    out: dict[int, list[int]] = {}
    for e in edges:
        out.setdefault(e.src, []).append(e.dst)
    reached = 1
    queue = [root]
    while queue:
        u = queue.pop()
        for w in out.get(u, ()):
            reached += 1
            queue.append(w)
    return reached == len(vertices)


def enumerate_arborescences(g: Digraph, cap: int = DEFAULT_VERTEX_CAP) -> ArborescenceSet:
    """All arborescences of ``g``: one in-edge per non-root vertex, no cycles.

    The choices are made vertex by vertex and a partial choice is dropped as
    soon as it closes a cycle, which visits the acyclic part of the full
    Cartesian product only.  Only vertices of the initial SCC can be roots.
    """
    g = normalize(g)
    if len(g.vertices) > cap:
        raise CapExceededError("oracle enumeration (vertices)", len(g.vertices), cap)
    part = scc(g)
    if len(part.initial) != 1:
        return ArborescenceSet(g, ())
    members = []
    for root in part.components[part.initial[0]]:
        others = [v for v in g.vertices if v != root]
        choices = [g.in_edges(v) for v in others]
        if any(not c for c in choices):
            continue
        parent: dict[int, int] = {}
        picked: list[int] = []

        def closes_cycle(src, dst):
            x = src
            while x in parent:
                if x == dst:
                    return True
                x = parent[x]
            return x == dst

        def extend(k):
            if k == len(others):
                members.append((root, frozenset(picked)))
                return
            v = others[k]
            for e in choices[k]:
                if closes_cycle(e.src, v):
                    continue
                parent[v] = e.src
                picked.append(e.id)
                extend(k + 1)
                picked.pop()
                del parent[v]

        extend(0)
    return ArborescenceSet(g, tuple(members))


def kirchhoff_monomials(g: Digraph, cap: int = DEFAULT_VERTEX_CAP) -> frozenset[ex.Monomial]:
    """κ(g) expanded into monomials over the atomic edge-label variables."""
    arbs = enumerate_arborescences(g, cap)
    g = arbs.graph
    total: dict[tuple, int] = {}
    for _, ids in arbs:
        labels = [g.edge(i).label for i in ids]
        if all(lab.kind == ex.VAR for lab in labels):
            key = tuple(sorted(lab.symbol for lab in labels))
            total[key] = total.get(key, 0) + 1
        else:
            for m, c in ex.expand_counter(ex.mul(*labels)).items():
                total[m] = total.get(m, 0) + c
    return frozenset(ex.Monomial(tuple(sorted(m)), c) for m, c in total.items())


def kirchhoff_expr(g: Digraph, cap: int = DEFAULT_VERTEX_CAP):
    """κ(g) as a sum over arborescences of label products, or None if there are none."""
    arbs = enumerate_arborescences(g, cap)
    g = arbs.graph
    if not arbs.members:
        return None
    terms = [ex.mul(*(g.edge(i).label for i in sorted(ids))) for _, ids in arbs]
    return ex.add(*terms)


# ---------------------------------------------------------------------------
# Matrix-tree theorem


def bareiss_determinant(matrix: list[list[int]]) -> int:
    """Exact integer determinant by fraction-free elimination."""
    n = len(matrix)
    if n == 0:
        return 1
    m = [row[:] for row in matrix]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        pivot = m[k][k]
        row_k = m[k]
        for i in range(k + 1, n):
            row_i = m[i]
            lead = row_i[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * pivot - lead * row_k[j]) // prev
            row_i[k] = 0
        prev = pivot
    return sign * m[n - 1][n - 1]


def kirchhoff_matrix(g: Digraph) -> tuple[list[int], list[list[int]]]:
    """In-degree Laplacian: weighted in-degrees on the diagonal minus adjacency.

    An edge weighs as many arborescence edges as its label has monomials, so
    merged parallel edges count with their multiplicity.
    """
    vs = list(g.vertices)
    pos = {v: i for i, v in enumerate(vs)}
    n = len(vs)
    lap = [[0] * n for _ in range(n)]
    for e in g.edges:
        if e.src == e.dst:
            continue
        w = e.label.count
        i, j = pos[e.src], pos[e.dst]
        lap[i][j] -= w
        lap[j][j] += w
    return vs, lap


def _minor(lap: list[list[int]], j: int) -> list[list[int]]:
    return [row[:j] + row[j + 1:] for i, row in enumerate(lap) if i != j]


def matrix_tree_count_rooted(g: Digraph, root: int) -> int:
    vs, lap = kirchhoff_matrix(g)
    return bareiss_determinant(_minor(lap, vs.index(root)))


def matrix_tree_count(g: Digraph) -> int:
    """Number of arborescences: the sum of all principal (jj) minors."""
    vs, lap = kirchhoff_matrix(g)
    return sum(bareiss_determinant(_minor(lap, j)) for j in range(len(vs)))
