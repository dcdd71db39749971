import json
import subprocess
import sys

import pytest

from corescope.cli import main, parse_delta
from corescope.cores import core_decomposition
from corescope.generators import gen_erdos_renyi
from corescope.graph import diameter, neighborhood_size_stats, read_edge_list, to_edge_list


@pytest.fixture
def er_file(tmp_path):
    path = tmp_path / "er.txt"
    path.write_text(to_edge_list(gen_erdos_renyi(300, 3 / 299, 4), use_labels=False))
    return path


def run(*argv):
    return main([str(a) for a in argv])


def read_csv(path):
    lines = path.read_text().splitlines()
    header = lines[0].split(",")
    return header, [dict(zip(header, ln.split(","))) for ln in lines[1:]]


def test_parse_delta():
    assert parse_delta("0..4") == (0, 1, 2, 3, 4)
    assert parse_delta("3") == (3,)


def test_gen_shell_then_cores(tmp_path):
    g = tmp_path / "g.txt"
    assert run("gen-shell", "0,4", "--seed", 1, "--output", g) == 0
    out = tmp_path / "cores.json"
    assert run("cores", "--input", g, "--format", "json", "--output", out) == 0
    body = json.loads(out.read_text())
    assert body["shell_distribution"] == [0, 4]
    assert set(body["core"].values()) == {2}


def test_sidecar_records_seed_and_digest(tmp_path, er_file):
    out = tmp_path / "cl.csv"
    assert run("cluster", "--input", er_file, "--seed", 7, "--output", out) == 0
    meta = json.loads((tmp_path / "cl.csv.meta.json").read_text())
    assert meta["tool"] == "corescope" and meta["command"] == "cluster"
    assert meta["seed"] == 7
    assert meta["input"] == "er.txt"
    assert len(meta["input_sha256"]) == 64
    assert meta["summary"]["clusters"] > 0
    assert meta["params"]["degree_biased"] is False


def test_cores_csv_matches_library(tmp_path, er_file):
    out = tmp_path / "c.csv"
    assert run("cores", "--input", er_file, "--output", out) == 0
    g, _ = read_edge_list(er_file)
    core = core_decomposition(g).core
    _, rows = read_csv(out)
    assert {r["vertex"]: int(r["core"]) for r in rows} == {g.label(v): int(core[v]) for v in range(g.n)}


def test_stats_against_library(tmp_path, er_file):
    out = tmp_path / "s.csv"
    assert run("stats", "--input", er_file, "--delta", "1..3", "--output", out) == 0
    _, rows = read_csv(out)
    got = {r["statistic"]: r["value"] for r in rows}
    g, _ = read_edge_list(er_file)
    assert int(got["n"]) == g.n and int(got["m"]) == g.m
    assert int(got["max_degree"]) == int(g.degrees.max())
    assert int(got["degeneracy"]) == core_decomposition(g).degeneracy
    assert int(got["diameter"]) == diameter(g).diameter
    for s in neighborhood_size_stats(g, [1, 2, 3]):
        assert float(got[f"N{s.delta}_mean"]) == s.mean
        assert int(got[f"N{s.delta}_max"]) == s.max


def test_estimate_and_ratio_shapes(tmp_path, er_file):
    est = tmp_path / "e.csv"
    assert run("estimate", "--input", er_file, "--delta", "0..2", "--output", est) == 0
    header, rows = read_csv(est)
    assert header == ["vertex", "delta", "hat", "breve"]
    assert len(rows) == 3 * len({r["vertex"] for r in rows})
    assert all(int(r["breve"]) <= int(r["hat"]) for r in rows)
    rat = tmp_path / "r.csv"
    assert run("ratio", "--input", er_file, "--delta", "1..2", "--estimator", "hat", "--output", rat) == 0
    header, rows = read_csv(rat)
    assert header == ["vertex", "delta", "kind", "estimate", "core", "ratio"]
    assert all(float(r["ratio"]) >= 1.0 for r in rows)


def test_exposure_columns(tmp_path, er_file):
    out = tmp_path / "x.csv"
    assert run("exposure", "--input", er_file, "--kappa", 2, "--p", 0.3, "--trials", 200,
               "--limit", 62, "--output", out) == 0
    header, rows = read_csv(out)
    assert header[-2:] == ["mc_core_estimate", "mc_halfwidth"]
    for r in rows:
        assert float(r["pruned_degree_prob"]) <= float(r["degree_prob"])
        assert float(r["neighbor_degree_prob"]) <= float(r["degree_prob"])


def test_pmf_csv(tmp_path):
    out = tmp_path / "pmf.csv"
    assert run("pmf", "--mean-degree", 3, "--kappa", 8, "--output", out) == 0
    header, rows = read_csv(out)
    assert header == ["kappa", "probability"]
    assert [int(r["kappa"]) for r in rows] == list(range(9))
    meta = json.loads((tmp_path / "pmf.csv.meta.json").read_text())
    assert meta["summary"]["tail_exceeded"] is False


def test_gen_tree_prime(tmp_path):
    out = tmp_path / "t.txt"
    assert run("gen-tree", "--j", 2, "--levels", 3, "--prime", "--output", out) == 0
    g, _ = read_edge_list(out)
    assert (g.n, g.m) == (9, 14)


def test_stdout_when_no_output(capsys):
    assert run("gen-er", "--n", 20, "--p", 0.2, "--seed", 3) == 0
    assert capsys.readouterr().out == to_edge_list(gen_erdos_renyi(20, 0.2, 3), use_labels=False)


def test_missing_input_is_one_json_line(tmp_path, capsys):
    assert run("cores", "--input", tmp_path / "nope.txt") == 1
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1
    assert json.loads(err[0])["error"] == "FileNotFoundError"


def test_infeasible_shell_reports_error(capsys):
    assert run("gen-shell", "0,0,2") == 1
    assert "shell 3" in json.loads(capsys.readouterr().err)["message"]


@pytest.mark.parametrize("argv", [
    ["exposure", "--input", "x", "--kappa", "2", "--p", "1.5"],
    ["estimate", "--input", "x", "--delta", "4..1"],
    ["frobnicate"],
])
def test_usage_errors_exit_two(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2
    assert json.loads(capsys.readouterr().err.strip().splitlines()[-1])["error"] == "UsageError"


def test_neighbor_limit_error(tmp_path, capsys):
    # two-hop balls in a 12x12 grid meet several clusters
    path = tmp_path / "grid.txt"
    path.write_text("".join(f"{r * 12 + c} {r * 12 + c + 1}\n{c * 12 + r} {c * 12 + r + 12}\n"
                            for r in range(12) for c in range(11)))
    assert run("exposure", "--input", path, "--kappa", 1, "--p", 0.5, "--limit", 1) == 1
    assert json.loads(capsys.readouterr().err)["error"] == "ExposureLimitError"


def test_module_entry_point(tmp_path):
    out = tmp_path / "g.txt"
    res = subprocess.run([sys.executable, "-m", "corescope", "gen-er", "--n", "10", "--p", "0.5",
                          "--output", str(out)], capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert out.read_text() == to_edge_list(gen_erdos_renyi(10, 0.5, 0), use_labels=False)


def test_rerun_is_byte_identical(tmp_path, er_file):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        assert run("exposure", "--input", er_file, "--kappa", 2, "--p", 0.25, "--trials", 100,
                   "--seed", 5, "--output", out) == 0
    assert a.read_bytes() == b.read_bytes()
    sidecars = [p.with_name(p.name + ".meta.json").read_bytes() for p in (a, b)]
    assert sidecars[0] == sidecars[1]
