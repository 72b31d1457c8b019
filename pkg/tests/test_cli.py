import io
import json
import subprocess
import sys

import pytest

from kirchhoff import expr as ex
from kirchhoff.cli import main
from kirchhoff.digraph import format_edge_list, normalize, parse_edge_list
from kirchhoff.engine import build_figure1_graph
from kirchhoff.oracle import matrix_tree_count

from families import complete3, three_stage, two_cycle, two_sources


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, g in [("cycle", two_cycle()), ("split", two_sources()),
                    ("chain", build_figure1_graph()), ("three", three_stage()),
                    ("k3", complete3())]:
        p = tmp_path / f"{name}.txt"
        p.write_text(format_edge_list(g))
        paths[name] = str(p)
    paths["dir"] = tmp_path
    return paths


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def test_count(files, capsys):
    assert run("count", files["cycle"]) == (0, "2\n")
    code, out = run("count", files["split"])
    assert (code, out) == (1, "0\n")
    assert "initial" in capsys.readouterr().err


def test_count_matches_compress_and_matrix_tree(files):
    for name in ("cycle", "chain", "three"):
        g = parse_edge_list(open(files[name]).read())
        _, counted = run("count", files[name])
        _, text = run("compress", "--format", "json", files[name])
        e = ex.from_json(json.loads(text)["expr"])
        assert int(counted) == ex.evaluate(e, {s: 1 for s in ex.variables(e)})
        assert int(counted) == matrix_tree_count(normalize(g))


def test_compress_text_on_chain_example(files):
    code, out = run("compress", "--format", "text", files["chain"])
    assert code == 0
    lines = out.splitlines()
    expr_line = lines[0]
    occurrences = sum(1 for tok in expr_line.replace("(", " ").replace(")", " ")
                      .replace("+", " ").split())
    assert occurrences == 17
    report = dict(line.split(": ", 1) for line in lines[1:])
    assert report["scc_count"] == "6"
    assert report["arborescence_count"] == "16"
    assert report["compressed_symbol_count"] == "33"


def test_compress_json_and_zero(files):
    code, out = run("compress", "--format", "json", files["chain"])
    data = json.loads(out)
    assert data["report"]["arborescence_count"] == 16
    assert ex.from_json(data["expr"]).count == 16
    assert run("compress", files["split"]) == (1, "0\n")


def test_factor(files):
    code, out = run("factor", files["three"])
    assert code == 0
    assert json.loads(out)["prime_count"] == 3
    code, out = run("factor", "--format", "dot", files["three"])
    assert out.startswith("digraph factors")
    code, out = run("factor", "--format", "text", files["three"])
    assert out.count("prime [") == 3
    code, _ = run("factor", files["split"])
    assert code == 1


def test_enumerate_and_cap(files, capsys):
    code, out = run("enumerate", files["cycle"])
    assert code == 0 and out.splitlines() == ["a", "b"]
    code, out = run("enumerate", "--format", "json", files["cycle"])
    assert [json.loads(x) for x in out.splitlines()] == [["a"], ["b"]]
    code, out = run("enumerate", "--cap", "10", files["chain"])
    assert code == 3 and out == ""
    assert "16" in capsys.readouterr().err


def test_sample(files):
    code, out = run("sample", "--samples", "5", "--seed", "3", files["chain"])
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == 5
    assert all(len(line.split()) == 13 for line in lines)
    assert run("sample", "--samples", "5", "--seed", "3", files["chain"])[1] == out


def test_gcd(files):
    code, out = run("gcd", files["chain"], files["chain"])
    assert code == 0
    assert out.splitlines()[1] == "exact: true"
    code, out = run("gcd", "--format", "json", files["cycle"], files["chain"])
    assert json.loads(out)["shared_primes"] == 0


def test_gen_pe_round_trip(files):
    manifest = files["dir"] / "m.json"
    code, edges = run("gen-pe", "--depth", "2", "--width", "3", "--seed", "1",
                      "--manifest", str(manifest))
    assert code == 0
    pe_file = files["dir"] / "pe.txt"
    pe_file.write_text(edges)
    data = json.loads(manifest.read_text())
    _, out = run("factor", str(pe_file))
    assert json.loads(out)["prime_count"] == data["prime_count"] == 12


def test_stats(files):
    code, out = run("stats", "--format", "json", files["chain"])
    assert json.loads(out)["ratio"] == "12.58"
    code, _ = run("stats", files["split"])
    assert code == 1


def test_transpose_counts_in_arborescences(files, tmp_path):
    # a -> b <- c has no out-arborescence, but its transpose has one
    p = tmp_path / "v.txt"
    p.write_text("a b x\nc b y\n")
    assert run("count", str(p))[1] == "0\n"
    assert run("count", "--transpose", str(p)) == (0, "1\n")


def test_heuristic_and_threshold_flags(files):
    for h in ("scc", "dom", "elim"):
        assert run("count", "--heuristic", h, "--expand-threshold", "2", files["chain"]) == (0, "16\n")


def test_usage_errors(files, capsys):
    with pytest.raises(SystemExit) as info:
        main(["count", "--bogus", files["cycle"]])
    assert info.value.code == 2
    assert run("count", "--expand-threshold", "1", files["cycle"])[0] == 2
    assert run("count", "--format", "dot", files["cycle"])[0] == 2
    assert run("count", str(files["dir"] / "missing.txt"))[0] == 2
    bad = files["dir"] / "bad.txt"
    bad.write_text("a b c d\n")
    assert run("count", str(bad))[0] == 2
    assert "line 1" in capsys.readouterr().err


def test_depth_cap_exit_code(files):
    code, out = run("count", "--max-depth", "1", "--expand-threshold", "2", files["k3"])
    assert code == 3 and out == ""
    assert run("count", "--max-depth", "5", "--expand-threshold", "2", files["k3"]) == (0, "9\n")


def test_subprocess_is_deterministic_and_keeps_stdout_clean(files):
    cmd = [sys.executable, "-m", "kirchhoff", "sample", "--samples", "20", "--seed", "7",
           "-v", files["chain"]]
    first = subprocess.run(cmd, capture_output=True, check=True)
    second = subprocess.run(cmd, capture_output=True, check=True)
    assert first.stdout == second.stdout
    assert len(first.stdout.decode().splitlines()) == 20
    gen = subprocess.run([sys.executable, "-m", "kirchhoff", "gen-pe", "-v"],
                         capture_output=True, check=True)
    assert b"generated" in gen.stderr and b"generated" not in gen.stdout
    bad = subprocess.run([sys.executable, "-m", "kirchhoff", "count", "--nope", files["chain"]],
                         capture_output=True)
    assert bad.returncode == 2 and bad.stdout == b""
