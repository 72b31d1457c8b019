"""Command-line interface.

Results go to stdout and nothing else does; errors and notes go to stderr.
Exit codes: 0 success, 1 input without arborescences, 2 usage or input
error, 3 a size cap or the recursion depth cap was hit.
"""

from __future__ import annotations

import argparse
import json
import logging
import random
import sys

from . import expr as ex
from .decompose import all_factors
from .digraph import (
    GraphError,
    format_edge_list,
    normalize,
    parse_edge_list,
    scc,
    transpose,
)
from .engine import CompressConfig, Heuristic, ZeroEnumerator, compress, report
from .errors import CapExceededError, DepthExceededError, NoArborescenceError
from .ops import DEFAULT_BASES, PeSpec, kirchhoff_gcd, pe_generate, sample_arborescence

log = logging.getLogger("kirchhoff")

EXIT_OK, EXIT_NO_ARB, EXIT_USAGE, EXIT_CAP = 0, 1, 2, 3

HEURISTICS = {h.value: h for h in Heuristic}


class UsageError(Exception):
    pass


def _read_graph(path: str, flip: bool):
    try:
        if path == "-":
            text = sys.stdin.read()
        else:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
    except OSError as err:
        raise UsageError(f"cannot read {path}: {err.strerror}") from None
    g = normalize(parse_edge_list(text))
    return transpose(g) if flip else g


def _config(args) -> CompressConfig:
    try:
        return CompressConfig(
            heuristic=HEURISTICS[args.heuristic],
            expand_threshold=args.expand_threshold,
            max_depth=args.max_depth,
            seed=args.seed,
        )
    except ValueError as err:
        raise UsageError(str(err)) from None


def _compress(g, args):
    e = compress(g, _config(args))
    if isinstance(e, ZeroEnumerator):
        print(f"kirchhoff: {NoArborescenceError(len(scc(g).initial))}", file=sys.stderr)
    return e


def _emit(out, text: str):
    out.write(text if text.endswith("\n") else text + "\n")


def _require_format(args, *allowed):
    if args.format not in allowed:
        raise UsageError(f"{args.command} does not support --format {args.format}")


def _report_text(rep) -> str:
    d = rep.as_dict()
    return "\n".join(f"{k}: {v}" for k, v in d.items())


# ---------------------------------------------------------------------------
# Subcommands


def cmd_factor(args, out) -> int:
    _require_format(args, "json", "text", "dot")
    g = _read_graph(args.input, args.transpose)
    fz = all_factors(g)
    if args.format == "json":
        _emit(out, json.dumps(fz.to_json(), indent=2))
    elif args.format == "dot":
        _emit(out, fz.to_dot())
    else:
        for f in fz:
            if f.trivial:
                continue
            tag = "prime" if f.prime else "factor"
            _emit(out, f"{tag} [{f.rule.value}] {f.component.describe()}")
    return EXIT_OK


def cmd_compress(args, out) -> int:
    _require_format(args, "text", "json")
    g = _read_graph(args.input, args.transpose)
    e = _compress(g, args)
    if isinstance(e, ZeroEnumerator):
        _emit(out, "0")
        return EXIT_NO_ARB
    rep = report(g, e)
    if args.format == "json":
        _emit(out, json.dumps({"expr": ex.to_json(e), "report": rep.as_dict()}, indent=2))
    else:
        _emit(out, ex.pretty(e))
        _emit(out, _report_text(rep))
    return EXIT_OK


def cmd_count(args, out) -> int:
    _require_format(args, "text", "json")
    g = _read_graph(args.input, args.transpose)
    n = _compress(g, args).count
    _emit(out, json.dumps({"count": n}) if args.format == "json" else str(n))
    return EXIT_OK if n else EXIT_NO_ARB


def cmd_enumerate(args, out) -> int:
    _require_format(args, "text", "json")
    g = _read_graph(args.input, args.transpose)
    e = _compress(g, args)
    if isinstance(e, ZeroEnumerator):
        return EXIT_NO_ARB
    if e.count > args.cap:
        raise CapExceededError("enumeration (arborescences)", e.count, args.cap)
    for m in sorted(ex.iter_monomials(e)):
        if args.format == "json":
            _emit(out, json.dumps(list(m.symbols)))
        else:
            _emit(out, " ".join(m.symbols))
    return EXIT_OK


def cmd_sample(args, out) -> int:
    _require_format(args, "text", "json")
    if args.samples < 0:
        raise UsageError("--samples must be non-negative")
    g = _read_graph(args.input, args.transpose)
    e = _compress(g, args)
    if isinstance(e, ZeroEnumerator):
        return EXIT_NO_ARB
    rng = random.Random(args.seed if args.seed is not None else 0)
    for _ in range(args.samples):
        m = sample_arborescence(e, rng)
        if args.format == "json":
            _emit(out, json.dumps(list(m.symbols)))
        else:
            _emit(out, " ".join(m.symbols))
    return EXIT_OK


def cmd_gcd(args, out) -> int:
    _require_format(args, "text", "json")
    g1 = _read_graph(args.input, args.transpose)
    g2 = _read_graph(args.other, args.transpose)
    res = kirchhoff_gcd(g1, g2, _config(args))
    if args.format == "json":
        _emit(out, json.dumps({"expr": ex.to_json(res.expr), "exact": res.exact,
                               "shared_primes": res.matched}, indent=2))
    else:
        _emit(out, ex.pretty(res.expr))
        _emit(out, f"exact: {'true' if res.exact else 'false'}")
    return EXIT_OK


def cmd_gen_pe(args, out) -> int:
    _require_format(args, "text")
    bases = tuple(b for b in args.bases.split(",") if b)
    try:
        spec = PeSpec(args.depth, args.width, bases, args.seed if args.seed is not None else 0)
    except ValueError as err:
        raise UsageError(str(err)) from None
    pe = pe_generate(spec)
    _emit(out, format_edge_list(pe.graph))
    if args.manifest:
        with open(args.manifest, "w", encoding="utf-8") as fh:
            json.dump(pe.manifest, fh, indent=2)
            fh.write("\n")
    log.info("generated %d prime components, %d edges",
             pe.manifest["prime_count"], len(pe.graph.edges))
    return EXIT_OK


def cmd_stats(args, out) -> int:
    _require_format(args, "text", "json")
    g = _read_graph(args.input, args.transpose)
    e = _compress(g, args)
    rep = report(g, e)
    if args.format == "json":
        _emit(out, json.dumps(rep.as_dict(), indent=2))
    else:
        _emit(out, _report_text(rep))
    return EXIT_OK if rep.arborescence_count else EXIT_NO_ARB


# ---------------------------------------------------------------------------
# Argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--heuristic", choices=sorted(HEURISTICS), default="scc",
                        help="edge choice for deletion-contraction (default: scc)")
    common.add_argument("--expand-threshold", type=int, default=5, metavar="N",
                        help="expand prime factors with at most N vertices directly")
    common.add_argument("--max-depth", type=int, default=None, metavar="D",
                        help="fail when deletion-contraction nests deeper than D")
    common.add_argument("--seed", type=int, default=None, metavar="S")
    common.add_argument("--transpose", action="store_true",
                        help="reverse every edge first (in-arborescences)")
    common.add_argument("--format", choices=("text", "json", "dot"), default=None)
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    parser = argparse.ArgumentParser(
        prog="kirchhoff",
        description="Factor and compress the arborescence enumerator of a digraph.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, func, help_text, default_format="text", inputs=1):
        p = sub.add_parser(name, parents=[common], help=help_text)
        if inputs >= 1:
            p.add_argument("input", help="edge-list file, or - for stdin")
        if inputs == 2:
            p.add_argument("other", help="second edge-list file")
        p.set_defaults(func=func, default_format=default_format)
        return p

    add("factor", cmd_factor, "prime factors of the Kirchhoff polynomial", "json")
    add("compress", cmd_compress, "compressed Kirchhoff polynomial and size report")
    add("count", cmd_count, "number of arborescences")
    p = add("enumerate", cmd_enumerate, "list every arborescence, one per line")
    p.add_argument("--cap", type=int, default=10**4,
                   help="refuse to list more than this many (default: 10000)")
    p = add("sample", cmd_sample, "uniformly random arborescences")
    p.add_argument("--samples", type=int, default=1, metavar="K")
    add("gcd", cmd_gcd, "GCD of two Kirchhoff polynomials", inputs=2)
    p = add("gen-pe", cmd_gen_pe, "generate a PE digraph as an edge list", inputs=0)
    p.add_argument("--depth", type=int, default=2)
    p.add_argument("--width", type=int, default=3)
    p.add_argument("--bases", default=",".join(DEFAULT_BASES),
                   help="comma-separated base components")
    p.add_argument("--manifest", metavar="PATH", help="write the prime structure as JSON")
    add("stats", cmd_stats, "size report only")
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.format is None:
        args.format = args.default_format
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args, out)
    except UsageError as err:
        print(f"kirchhoff: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except NoArborescenceError as err:
        print(f"kirchhoff: {err}", file=sys.stderr)
        if args.command == "count":
            _emit(out, "0")
        return EXIT_NO_ARB
    except (CapExceededError, DepthExceededError) as err:
        print(f"kirchhoff: {err}", file=sys.stderr)
        return EXIT_CAP
    except GraphError as err:
        print(f"kirchhoff: invalid input: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
