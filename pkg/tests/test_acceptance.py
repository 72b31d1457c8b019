"""Acceptance criteria, one test each.

Every test stores a short measurement summary in ``detail``; conftest prints
one PASS/FAIL line per criterion at the end of the run.
"""

import gc
import math
import random
import time

import pytest
import sympy
from scipy.stats import chisquare

from kirchhoff import expr as ex
from kirchhoff.decompose import all_factors, domination_factors, is_prime_component, scc_factors
from kirchhoff.digraph import (
    contract,
    dominator_tree,
    from_edges,
    has_arborescence,
    induced,
    is_strongly_connected,
    normalize,
    root_at,
    scc,
)
from kirchhoff.engine import (
    CompressConfig,
    Heuristic,
    build_figure1_graph,
    compress,
    count_arborescences,
    report,
    scc_stage_expr,
)
from kirchhoff.oracle import kirchhoff_expr, kirchhoff_monomials, matrix_tree_count
from kirchhoff.ops import PeSpec, kirchhoff_gcd, pe_compose, pe_generate, random_digraph, \
    sample_arborescence

from families import random_family, three_stage

FAMILY_SIZE = 500


@pytest.fixture(scope="module")
def family():
    return random_family(FAMILY_SIZE, 3, 6, (0.2, 0.35, 0.5), seed=2024)


def _detail(request, text):
    request.node.user_properties.append(("detail", text))
    print(text)


def _product_of(graphs):
    return ex.mul(*(kirchhoff_expr(h) for h in graphs if len(h.vertices) > 1))


@pytest.mark.criterion(1, "compressed form expands to the oracle's monomial set")
def test_criterion_1_oracle_equivalence(request, family):
    start = time.perf_counter()
    mismatches = 0
    runs = 0
    for g in family:
        truth = kirchhoff_monomials(g)
        for h in Heuristic:
            for threshold in (5, 2):
                e = compress(g, CompressConfig(heuristic=h, expand_threshold=threshold))
                runs += 1
                if ex.expand(e) != truth:
                    mismatches += 1
    elapsed = time.perf_counter() - start
    sizes = {len(g.vertices) for g in family}
    _detail(request, f"{len(family)} digraphs, {runs} runs, {mismatches} mismatches, "
                     f"{elapsed:.1f}s")
    assert sizes == {3, 4, 5, 6}
    assert mismatches == 0
    assert elapsed < 60


@pytest.mark.criterion(2, "arborescence count equals the matrix-tree count")
def test_criterion_2_count_equivalence(request):
    graphs = random_family(200, 3, 12, (0.15, 0.2, 0.25), seed=7)
    start = time.perf_counter()
    wrong = sum(1 for g in graphs if count_arborescences(g) != matrix_tree_count(g))
    elapsed = time.perf_counter() - start
    largest = max(len(g.vertices) for g in graphs)
    biggest = max(matrix_tree_count(g) for g in graphs)
    _detail(request, f"{len(graphs)} digraphs up to |V|={largest}, max count {biggest}, "
                     f"{wrong} wrong, {elapsed:.1f}s")
    assert largest == 12
    assert wrong == 0
    assert elapsed < 60


def _domination_step_holds(g, root):
    """One domination step at every vertex u of g rooted at ``root``."""
    truth = kirchhoff_monomials(g)
    tree = dominator_tree(g, root)
    for u in g.vertices:
        dom = tree.dominated(u)
        inner = root_at(induced(g, dom), u)
        outer = normalize(contract(g, dom, u))
        parts = [kirchhoff_expr(h) for h in (inner, outer) if len(h.vertices) > 1]
        if ex.expand(ex.mul(*parts)) != truth:
            return False
    return True


@pytest.mark.criterion(3, "factor products reproduce the Kirchhoff polynomial")
def test_criterion_3_factorization_soundness(request, family):
    start = time.perf_counter()
    bad_products = 0
    bad_steps = 0
    rooted = 0
    for g in family:
        fz = all_factors(g)
        if ex.expand(_product_of(f.component for f in fz)) != kirchhoff_monomials(g):
            bad_products += 1
        part = scc(g)
        for v in part.components[part.initial[0]]:
            h = root_at(g, v)
            rooted += 1
            if not _domination_step_holds(h, v):
                bad_steps += 1
    elapsed = time.perf_counter() - start
    _detail(request, f"{len(family)} factorizations, {bad_products} wrong; {rooted} rooted "
                     f"instances, {bad_steps} failing a domination step; {elapsed:.1f}s")
    assert bad_products == 0 and bad_steps == 0
    assert elapsed < 120


def _splits(g) -> bool:
    """True if another SCC or domination stage would split ``g``."""
    nontrivial = lambda parts: sum(1 for h in parts if len(h.vertices) > 1)  # noqa: E731
    return nontrivial(scc_factors(g)) > 1 or nontrivial(domination_factors(g)) > 1


@pytest.mark.criterion(4, "every emitted factor is prime; a further stage splits nothing")
def test_criterion_4_primality(request, family):
    fixture = three_stage()
    # the fixture really needs all three stages
    stage1 = [h for h in scc_factors(fixture) if len(h.vertices) > 1]
    stage2 = [p for h in stage1 for p in domination_factors(h) if len(p.vertices) > 1]
    assert any(_splits(h) for h in stage2)
    assert any(not is_prime_component(h) for h in stage2)

    factors = 0
    not_prime = 0
    split_again = 0
    for g in family + [normalize(fixture)]:
        for f in all_factors(g).nontrivial():
            factors += 1
            if not (f.prime and is_prime_component(f.component)):
                not_prime += 1
            if _splits(f.component):
                split_again += 1
    _detail(request, f"{factors} non-trivial factors, {not_prime} not prime, "
                     f"{split_again} split by a fourth stage")
    assert not_prime == 0 and split_again == 0


@pytest.mark.criterion(5, "chain example: 16 arborescences, 17 and 25 written variables")
def test_criterion_5_chain_example(request):
    start = time.perf_counter()
    g = build_figure1_graph()
    e = compress(g)
    count = ex.count_monomials(e)
    occurrences = ex.size_metrics(e).var_occurrences
    scc_only = ex.size_metrics(scc_stage_expr(g)).var_occurrences
    elapsed = time.perf_counter() - start
    _detail(request, f"count {count}, compressed {occurrences}, SCC stage only {scc_only}, "
                     f"{elapsed * 1000:.0f}ms")
    assert (count, occurrences, scc_only) == (16, 17, 25)
    assert elapsed < 1


@pytest.mark.criterion(6, "sampler is uniform on the chain example")
def test_criterion_6_sampling(request):
    start = time.perf_counter()
    e = compress(build_figure1_graph())
    monos = sorted(m.symbols for m in ex.expand(e))
    index = {m: i for i, m in enumerate(monos)}
    rng = random.Random(16000)
    observed = [0] * len(monos)
    for _ in range(16000):
        observed[index[sample_arborescence(e, rng).symbols]] += 1
    p = chisquare(observed).pvalue
    elapsed = time.perf_counter() - start
    sigma = math.sqrt(16000 / 16 * 15 / 16)
    worst = max(abs(o - 1000) for o in observed) / sigma
    _detail(request, f"16 outcomes, chi-square p={p:.3g}, worst deviation {worst:.2f} sigma, "
                     f"{elapsed:.2f}s")
    assert len(monos) == 16
    assert p > 1e-3
    assert worst < 5
    assert elapsed < 5


def _rename(g, prefix):
    return [(f"{prefix}{g.name(e.src)}", f"{prefix}{g.name(e.dst)}", e.label.symbol)
            for e in g.edges]


def _random_rooted(rng, n, prefix):
    while True:
        g = normalize(random_digraph(n, 0.5, rng, prefix=prefix))
        if has_arborescence(g):
            return from_edges(_rename(g, prefix), vertices=[f"{prefix}{g.name(v)}"
                                                           for v in g.vertices])


def _random_core(rng, n):
    while True:
        g = normalize(random_digraph(n, 0.6, rng, prefix="q"))
        if n == 1 or is_strongly_connected(g):
            return from_edges(_rename(g, "c"), vertices=[f"c{g.name(v)}" for v in g.vertices])


def composed_pairs(count, seed):
    """Pairs P1∘Q, P2∘Q sharing the labeled component Q, at most 6 vertices each."""
    rng = random.Random(seed)
    pairs = []
    for k in range(count):
        core = _random_core(rng, rng.randint(2, 3))
        entries = [core.name(v) for v in core.vertices]
        if rng.random() < 0.5:
            entries = entries[:1 + rng.randrange(len(entries))]
        labels = [f"in_{v}" for v in entries]
        p1 = _random_rooted(rng, rng.randint(2, 3), "x")
        # sometimes both sides share the parent as well
        p2 = p1 if k % 5 == 0 else _random_rooted(rng, rng.randint(2, 3), "y")
        a1 = p1.name(p1.vertices[rng.randrange(len(p1.vertices))])
        a2 = p2.name(p2.vertices[rng.randrange(len(p2.vertices))])
        g1 = pe_compose(p1, core, a1, entries=entries, entry_labels=labels)
        g2 = pe_compose(p2, core, a2, entries=entries, entry_labels=labels)
        pairs.append((g1, g2))
    return pairs


def _sympy_poly(monomials, gens):
    terms = [sympy.Mul(*(gens[s] for s in m.symbols)) * m.coeff for m in monomials]
    return sympy.Poly(sympy.Add(*terms), *gens.values())


def brute_force_gcd(g1, g2) -> set:
    m1, m2 = kirchhoff_monomials(g1), kirchhoff_monomials(g2)
    names = sorted({s for m in m1 | m2 for s in m.symbols}, key=ex.natural_key)
    gens = {s: sympy.Symbol(s) for s in names}
    d = sympy.gcd(_sympy_poly(m1, gens), _sympy_poly(m2, gens))
    if d.LC() < 0:
        d = -d
    out = set()
    for monom, coeff in d.terms():
        symbols = []
        for s, power in zip(names, monom):
            symbols += [s] * power
        out.add((tuple(sorted(symbols)), int(coeff)))
    return out


@pytest.mark.criterion(7, "GCD matches brute-force polynomial GCD")
def test_criterion_7_gcd(request):
    start = time.perf_counter()
    pairs = composed_pairs(120, seed=77)
    wrong = 0
    inexact = 0
    for g1, g2 in pairs:
        assert len(g1.vertices) <= 6 and len(g2.vertices) <= 6
        res = kirchhoff_gcd(g1, g2)
        inexact += not res.exact
        got = {(m.symbols, m.coeff) for m in ex.expand(res.expr)}
        if got != brute_force_gcd(g1, g2):
            wrong += 1
    elapsed = time.perf_counter() - start
    _detail(request, f"{len(pairs)} pairs, {wrong} wrong, {inexact} inexact, {elapsed:.1f}s")
    assert wrong == 0
    assert elapsed < 60


@pytest.mark.criterion(8, "factorization time grows linearly in the edge count")
def test_criterion_8_scaling(request):
    graphs = [normalize(pe_generate(PeSpec(2, w, ("cycle2",), seed=1)).graph)
              for w in (50, 70, 100, 141)]
    edges = [len(g.edges) for g in graphs]
    best = [math.inf] * len(graphs)
    for _ in range(15):
        for i, g in enumerate(graphs):
            gc.collect()
            gc.disable()
            try:
                t = time.perf_counter()
                all_factors(g)
                best[i] = min(best[i], time.perf_counter() - t)
            finally:
                gc.enable()
    # growth per exact doubling of |E|
    growth = [(best[i + 1] / best[i]) ** (1 / math.log2(edges[i + 1] / edges[i]))
              for i in range(len(graphs) - 1)]
    _detail(request, "edges " + "/".join(map(str, edges)) + ", seconds "
            + "/".join(f"{t:.3f}" for t in best) + ", growth per doubling "
            + "/".join(f"{x:.2f}" for x in growth))
    assert edges[0] >= 10_000 and edges[-1] >= 80_000
    assert all(1.4 <= x <= 2.6 for x in growth)
    assert best[-1] < 2


@pytest.mark.criterion(9, "PE(4,5) digraph compresses by more than 10^40")
def test_criterion_9_pe_compression(request):
    start = time.perf_counter()
    pe = pe_generate(PeSpec(4, 5, ("cycle2",), seed=0))
    rep = report(pe.graph)
    elapsed = time.perf_counter() - start
    log_ratio = math.log10(rep.expanded_symbol_count) - math.log10(rep.compressed_symbol_count)
    _detail(request, f"{pe.manifest['prime_count']} primes, {len(pe.graph.edges)} edges, "
                     f"compressed {rep.compressed_symbol_count} symbols, count ~10^"
                     f"{len(str(rep.arborescence_count)) - 1}, ratio {rep.ratio_text()}, "
                     f"{elapsed:.2f}s")
    assert rep.compressed_symbol_count < 10**4
    assert rep.arborescence_count > 10**50
    assert log_ratio > 40
    assert elapsed < 10
