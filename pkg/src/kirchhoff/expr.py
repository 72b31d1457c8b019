"""Hash-consed expression DAGs for compressed Kirchhoff polynomials.

An expression is built from four node kinds: the constant ``1``, a variable
(an edge label), a k-ary sum and a k-ary product.  Nodes are interned by a
store, so structurally equal subterms are the same Python object and can be
compared with ``is``.  Every node caches its monomial count (the value at
all-ones, exact because the enumerators built here have unit coefficients),
its degree and a deterministic structural digest used for ordering children.

The polynomials handled here never need subtraction, division or
coefficients other than one, so none of that is supported.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import random
import re
import threading
import weakref
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping

from .errors import CapExceededError, KirchhoffError

ONE, VAR, SUM, PROD = 0, 1, 2, 3
_KIND_NAMES = {ONE: "one", VAR: "var", SUM: "sum", PROD: "prod"}

DEFAULT_EXPANSION_CAP = 10**6
# 2**61 - 1, a Mersenne prime.
FIELD_PRIME = (1 << 61) - 1

_DIGITS = re.compile(r"(\d+)")


def natural_key(symbol: str) -> tuple:
    """Sort key that orders ``a2`` before ``a10``."""
    parts = _DIGITS.split(symbol)
    return tuple((1, int(p)) if i % 2 else (0, p) for i, p in enumerate(parts) if p)


class Expr:
    """A node of an interned expression DAG.  Build nodes through a store."""

    __slots__ = (
        "kind", "symbol", "args", "uid", "count", "degree", "digest", "sortkey",
        "__weakref__",
    )

    def __init__(self, kind, symbol, args, uid, count, degree, digest, sortkey):
        self.kind = kind
        self.symbol = symbol
        self.args = args
        self.uid = uid
        self.count = count
        self.degree = degree
        self.digest = digest
        self.sortkey = sortkey

    @property
    def is_one(self) -> bool:
        return self.kind == ONE

    @property
    def is_var(self) -> bool:
        return self.kind == VAR

    @property
    def is_sum(self) -> bool:
        return self.kind == SUM

    @property
    def is_prod(self) -> bool:
        return self.kind == PROD

    def __repr__(self):
        text = pretty(self)
        if len(text) > 60:
            text = text[:57] + "..."
        return f"Expr<{text}>"

    def __str__(self):
        return pretty(self)

    # hash-consing makes identity the structural equality
    def __eq__(self, other):
        return self is other

    def __hash__(self):
        return self.uid


class ExprStore:
    """Interning table for expression nodes.

    Node construction is serialized by a lock; reading finished nodes needs
    no synchronization because nodes are never mutated.  Entries are held
    weakly, so nodes no longer referenced anywhere are dropped.
    """

    def __init__(self):
        self._table: weakref.WeakValueDictionary = weakref.WeakValueDictionary()
        self._lock = threading.Lock()
        self._uids = itertools.count()
        digest = hashlib.blake2b(b"1", digest_size=8).digest()
        self.one = Expr(ONE, None, (), next(self._uids), 1, 0, digest, ((), ONE, digest))

    def __len__(self):
        return len(self._table)

    def var(self, symbol: str) -> Expr:
        key = (VAR, symbol)
        node = self._table.get(key)
        if node is not None:
            return node
        with self._lock:
            node = self._table.get(key)
            if node is None:
                digest = hashlib.blake2b(b"v" + symbol.encode(), digest_size=8).digest()
                node = Expr(VAR, symbol, (), next(self._uids), 1, 1, digest,
                            (natural_key(symbol), VAR, digest))
                self._table[key] = node
        return node

    def add(self, *terms: Expr, flatten: bool = True) -> Expr:
        """Sum of ``terms``; a single term is returned as is.

        With ``flatten`` nested sums are spliced into the new node.  The
        deletion-contraction engine turns it off so that large shared sums
        stay shared instead of being copied into every parent.
        """
        args = []
        for t in terms:
            if flatten and t.kind == SUM:
                args.extend(t.args)
            else:
                args.append(t)
        if not args:
            raise KirchhoffError("empty sum: zero is not representable as an Expr")
        if len(args) == 1:
            return args[0]
        return self._compound(SUM, args)

    def mul(self, *factors: Expr) -> Expr:
        args = []
        for f in factors:
            if f.kind == PROD:
                args.extend(f.args)
            elif f.kind != ONE:
                args.append(f)
        if not args:
            return self.one
        if len(args) == 1:
            return args[0]
        return self._compound(PROD, args)

    def _compound(self, kind, args):
        args.sort(key=_sortkey)
        key = (kind, tuple(a.uid for a in args))
        node = self._table.get(key)
        if node is not None:
            return node
        if kind == SUM:
            count = sum(a.count for a in args)
            degrees = {a.degree for a in args}
            degree = degrees.pop() if len(degrees) == 1 else None
        else:
            count = 1
            degree = 0
            for a in args:
                count *= a.count
                degree = None if degree is None or a.degree is None else degree + a.degree
        h = hashlib.blake2b(b"s" if kind == SUM else b"p", digest_size=8)
        for a in args:
            h.update(a.digest)
        digest = h.digest()
        sortkey = (args[0].sortkey[0], kind, digest)
        with self._lock:
            node = self._table.get(key)
            if node is None:
                node = Expr(kind, None, tuple(args), next(self._uids), count, degree,
                            digest, sortkey)
                self._table[key] = node
        return node


def _sortkey(e: Expr):
    return e.sortkey


STORE = ExprStore()


def one() -> Expr:
    return STORE.one


def var(symbol: str) -> Expr:
    return STORE.var(symbol)


def add(*terms: Expr, flatten: bool = True) -> Expr:
    return STORE.add(*terms, flatten=flatten)


def mul(*factors: Expr) -> Expr:
    return STORE.mul(*factors)


def postorder(e: Expr) -> list[Expr]:
    """Distinct nodes of the DAG below ``e``, children before parents."""
    seen = set()
    out = []
    stack = [(e, False)]
    while stack:
        node, done = stack.pop()
        if done:
            out.append(node)
            continue
        if node.uid in seen:
            continue
        seen.add(node.uid)
        stack.append((node, True))
        for child in node.args:
            if child.uid not in seen:
                stack.append((child, False))
    return out


# ---------------------------------------------------------------------------
# Monomials and expansion


@dataclass(frozen=True, order=True)
class Monomial:
    """A product of edge labels with a positive integer coefficient.

    ``symbols`` is sorted.  For enumerators built by this package every
    symbol occurs once and the coefficient is 1, so a monomial is just the
    label set of one arborescence.
    """

    symbols: tuple[str, ...]
    coeff: int = 1

    @property
    def degree(self) -> int:
        return len(self.symbols)

    def __str__(self):
        body = " ".join(self.symbols) if self.symbols else "1"
        return body if self.coeff == 1 else f"{self.coeff} {body}"


def count_monomials(e: Expr) -> int:
    """Number of monomials, counted with multiplicity (value at all-ones)."""
    return e.count


def expand_counter(e: Expr, cap: int = DEFAULT_EXPANSION_CAP) -> Counter:
    """Canonical expansion as a Counter from sorted symbol tuples to coefficients."""
    if e.count > cap:
        raise CapExceededError("expansion", e.count, cap)
    memo: dict[int, Counter] = {}
    for node in postorder(e):
        if node.kind == ONE:
            poly = Counter({(): 1})
        elif node.kind == VAR:
            poly = Counter({(node.symbol,): 1})
        elif node.kind == SUM:
            poly = Counter()
            for child in node.args:
                poly.update(memo[child.uid])
        else:
            poly = memo[node.args[0].uid]
            for child in node.args[1:]:
                right = memo[child.uid]
                product: Counter = Counter()
                for m1, c1 in poly.items():
                    for m2, c2 in right.items():
                        product[tuple(sorted(m1 + m2))] += c1 * c2
                poly = product
        memo[node.uid] = poly
    return memo[e.uid]


def expand(e: Expr, cap: int = DEFAULT_EXPANSION_CAP) -> frozenset[Monomial]:
    """Full expansion of ``e`` into monomials, equal monomials merged."""
    return frozenset(Monomial(m, c) for m, c in expand_counter(e, cap).items())


def iter_monomials(e: Expr) -> Iterator[Monomial]:
    """Lazily yield the monomials of ``e`` without materializing the expansion.

    Monomials come out in a deterministic order; duplicates (which never
    occur for enumerators) would be yielded repeatedly.
    """

    def walk(node):
        if node.kind == ONE:
            yield ()
        elif node.kind == VAR:
            yield (node.symbol,)
        elif node.kind == SUM:
            for child in node.args:
                yield from walk(child)
        else:
            yield from _product(node.args)

    def _product(children):
        if not children:
            yield ()
            return
        for head in walk(children[0]):
            for tail in _product(children[1:]):
                yield head + tail

    for symbols in walk(e):
        yield Monomial(tuple(sorted(symbols)))


def variables(e: Expr) -> frozenset[str]:
    return frozenset(n.symbol for n in postorder(e) if n.kind == VAR)


# ---------------------------------------------------------------------------
# Evaluation


class MissingSymbolError(KirchhoffError):
    def __init__(self, missing):
        self.missing = sorted(missing, key=natural_key)
        super().__init__("unassigned symbols: " + ", ".join(self.missing))


def evaluate(e: Expr, assignment: Mapping[str, object]) -> Fraction:
    """Exact rational value of ``e``; each DAG node is evaluated once."""
    missing = variables(e) - assignment.keys()
    if missing:
        raise MissingSymbolError(missing)
    memo: dict[int, Fraction] = {}
    for node in postorder(e):
        if node.kind == ONE:
            val = Fraction(1)
        elif node.kind == VAR:
            val = Fraction(assignment[node.symbol])
        elif node.kind == SUM:
            val = sum((memo[c.uid] for c in node.args), Fraction(0))
        else:
            val = Fraction(1)
            for c in node.args:
                val *= memo[c.uid]
        memo[node.uid] = val
    return memo[e.uid]


def evaluate_mod(e: Expr, assignment: Mapping[str, int], modulus: int = FIELD_PRIME) -> int:
    memo: dict[int, int] = {}
    for node in postorder(e):
        if node.kind == ONE:
            val = 1
        elif node.kind == VAR:
            val = assignment[node.symbol] % modulus
        elif node.kind == SUM:
            val = sum(memo[c.uid] for c in node.args) % modulus
        else:
            val = 1
            for c in node.args:
                val = val * memo[c.uid] % modulus
        memo[node.uid] = val
    return memo[e.uid]


# ---------------------------------------------------------------------------
# Equality


@dataclass(frozen=True)
class Equality:
    """Outcome of :func:`poly_equal`; truthy when the polynomials agree.

    ``exact`` is False when the answer came from random evaluation, in which
    case a True result may (with negligible probability) be wrong.
    """

    equal: bool
    exact: bool

    def __bool__(self):
        return self.equal


def poly_equal(e1: Expr, e2: Expr, *, cap: int = DEFAULT_EXPANSION_CAP,
               trials: int = 16, seed: int = 0) -> Equality:
    if e1 is e2:
        return Equality(True, True)
    if e1.count <= cap and e2.count <= cap:
        return Equality(expand_counter(e1, cap) == expand_counter(e2, cap), True)
    if e1.count != e2.count or e1.degree != e2.degree:
        return Equality(False, True)
    symbols = sorted(variables(e1) | variables(e2), key=natural_key)
    rng = random.Random(seed)
    for _ in range(trials):
        point = {s: rng.randrange(FIELD_PRIME) for s in symbols}
        if evaluate_mod(e1, point) != evaluate_mod(e2, point):
            return Equality(False, True)
    return Equality(True, False)


# ---------------------------------------------------------------------------
# Structural checks


def is_homogeneous(e: Expr) -> bool:
    """Every sum node has children of equal degree."""
    return all(n.degree is not None for n in postorder(e))


def has_disjoint_products(e: Expr) -> bool:
    """Children of every product node have pairwise disjoint variable sets."""
    varsets: dict[int, frozenset] = {}
    for node in postorder(e):
        if node.kind == VAR:
            vs = frozenset((node.symbol,))
        elif node.kind == ONE:
            vs = frozenset()
        else:
            child_sets = [varsets[c.uid] for c in node.args]
            vs = frozenset().union(*child_sets)
            if node.kind == PROD and len(vs) != sum(len(s) for s in child_sets):
                return False
        varsets[node.uid] = vs
    return True


# ---------------------------------------------------------------------------
# Size metrics


@dataclass(frozen=True)
class SizeMetrics:
    var_occurrences: int
    symbol_count: int
    monomials: int
    expanded_symbol_count: int
    dag_nodes: int


def expanded_size(monomials: int, degree: int) -> int:
    """Symbols in the written-out sum of ``monomials`` products of ``degree`` labels.

    Each monomial has ``degree`` labels and ``degree - 1`` multiplications,
    and the monomials are joined by ``monomials - 1`` additions.
    """
    if monomials == 0:
        return 0
    return monomials * degree + monomials * max(degree - 1, 0) + (monomials - 1)


def size_metrics(e: Expr) -> SizeMetrics:
    """Sizes of ``e`` with the DAG unfolded into a tree.

    A k-ary sum or product counts as k - 1 operators.  The constant 1
    contributes no symbols.
    """
    occ: dict[int, int] = {}
    ops: dict[int, int] = {}
    nodes = postorder(e)
    for node in nodes:
        if node.kind == VAR:
            occ[node.uid], ops[node.uid] = 1, 0
        elif node.kind == ONE:
            occ[node.uid], ops[node.uid] = 0, 0
        else:
            occ[node.uid] = sum(occ[c.uid] for c in node.args)
            ops[node.uid] = sum(ops[c.uid] for c in node.args) + len(node.args) - 1
    degree = e.degree if e.degree is not None else 0
    return SizeMetrics(
        var_occurrences=occ[e.uid],
        symbol_count=occ[e.uid] + ops[e.uid],
        monomials=e.count,
        expanded_symbol_count=expanded_size(e.count, degree),
        dag_nodes=len(nodes),
    )


# ---------------------------------------------------------------------------
# Text and JSON forms


def pretty(e: Expr) -> str:
    """Human-readable form: juxtaposition for products, ``+`` for sums.

    >>> pretty(mul(var("o"), add(var("a4"), var("a5"))))
    '(a4+a5) o'
    """
    memo: dict[int, str] = {}
    for node in postorder(e):
        if node.kind == ONE:
            text = "1"
        elif node.kind == VAR:
            text = node.symbol
        elif node.kind == SUM:
            text = "+".join(memo[c.uid] for c in node.args)
        else:
            text = " ".join(
                f"({memo[c.uid]})" if c.kind == SUM else memo[c.uid] for c in node.args
            )
        memo[node.uid] = text
    return memo[e.uid]


def to_json(e: Expr, shared: bool = True) -> dict:
    """JSON-ready form.  With ``shared`` the DAG goes into a node table."""
    if not shared:
        return _tree_json(e)
    index: dict[int, int] = {}
    table = []
    for node in postorder(e):
        if node.kind == ONE:
            entry = {"one": True}
        elif node.kind == VAR:
            entry = {"var": node.symbol}
        else:
            entry = {"op": _KIND_NAMES[node.kind], "args": [index[c.uid] for c in node.args]}
        index[node.uid] = len(table)
        table.append(entry)
    return {"nodes": table, "root": index[e.uid]}


def _tree_json(e: Expr) -> dict:
    if e.kind == ONE:
        return {"one": True}
    if e.kind == VAR:
        return {"var": e.symbol}
    return {"op": _KIND_NAMES[e.kind], "args": [_tree_json(c) for c in e.args]}


def from_json(data: dict, store: ExprStore = STORE) -> Expr:
    if "nodes" in data:
        built: list[Expr] = []
        for entry in data["nodes"]:
            built.append(_node_from_entry(entry, lambda i: built[i], store))
        return built[data["root"]]
    return _node_from_entry(data, lambda sub: from_json(sub, store), store)


def _node_from_entry(entry, resolve, store):
    if entry.get("one"):
        return store.one
    if "var" in entry:
        return store.var(entry["var"])
    args = [resolve(a) for a in entry["args"]]
    if entry["op"] == "sum":
        return store.add(*args, flatten=False)
    if entry["op"] == "prod":
        return store.mul(*args)
    raise KirchhoffError(f"unknown expression op {entry['op']!r}")


def dumps(e: Expr, shared: bool = True) -> str:
    return json.dumps(to_json(e, shared), separators=(",", ":"))


def product_of(exprs: Iterable[Expr]) -> Expr:
    return STORE.mul(*exprs)
