"""Command-line entry point: ``corescope <command> [options]``.

Every command writes its artifact to ``--output`` (atomically) or to stdout.
File outputs get a ``<output>.meta.json`` sidecar holding the tool version,
command, seed, input digest and parameters.  Failures print one JSON line
``{"error": ..., "message": ...}`` to stderr and exit non-zero.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import os
import sys
import tempfile
from typing import Any, Callable, Sequence

import numpy as np

from . import __version__
from .cores import ShellDistribution, core_decomposition
from .errors import CorescopeError
from .estimators import induced_all, propagate_all, ratio_report
from .exposure import (
    NEIGHBOR_LIMIT,
    Clustering,
    binomial_standard_error,
    degree_exposure_all,
    monte_carlo_core_exposure_all,
    neighbor_degree_exposure_all,
    three_net_clustering,
)
from .generators import (
    analytic_khat1_pmf,
    gen_complete_ary_tree,
    gen_erdos_renyi,
    gen_shell_distribution,
    gen_tree_prime,
)
from .graph import Graph, diameter, neighborhood_size_stats, read_edge_list, to_edge_list

log = logging.getLogger("corescope")


class UsageError(CorescopeError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        _emit_error("UsageError", message)
        sys.exit(2)


def _emit_error(kind: str, message: str) -> None:
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")


def parse_delta(text: str) -> tuple[int, ...]:
    """``"A..B"`` (inclusive) or a single ``"A"``."""
    try:
        if ".." in text:
            a, b = (int(x) for x in text.split("..", 1))
        else:
            a = b = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad delta range {text!r}, expected A..B") from None
    if a < 0 or b < a:
        raise argparse.ArgumentTypeError(f"delta range {text!r} is empty or negative")
    return tuple(range(a, b + 1))


def parse_counts(text: str) -> ShellDistribution:
    try:
        return ShellDistribution(tuple(int(x) for x in text.split(",")))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad shell counts {text!r}: {exc}") from None


def probability(text: str) -> float:
    p = float(text)
    if not 0.0 < p < 1.0:
        raise argparse.ArgumentTypeError(f"p must lie in (0, 1), got {text}")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="corescope", description="Core numbers, local estimators and exposure analysis.")
    parser.add_argument("--version", action="version", version=f"corescope {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name: str, help: str, *, needs_input: bool = False, seeded: bool = False,
            fmt: bool = True) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help)
        if needs_input:
            p.add_argument("--input", required=True, help="edge-list file")
        p.add_argument("--output", help="artifact path (default: stdout)")
        if seeded:
            p.add_argument("--seed", type=int, default=0)
        if fmt:
            p.add_argument("--format", choices=("csv", "json"), default="csv")
        return p

    add("cores", "per-vertex core numbers and shell distribution", needs_input=True)

    p = add("estimate", "propagating / induced estimates over a delta range", needs_input=True)
    p.add_argument("--delta", type=parse_delta, default=parse_delta("0..4"))
    p.add_argument("--estimator", choices=("hat", "breve", "both"), default="both")

    p = add("ratio", "estimate / core-number ratios per vertex and delta", needs_input=True)
    p.add_argument("--delta", type=parse_delta, default=parse_delta("0..4"))
    p.add_argument("--estimator", choices=("hat", "breve", "both"), default="both")
    p.add_argument("--bins", type=int, default=10, help="histogram bins for non-optimal ratios")

    p = add("gen-er", "Erdos-Renyi G(n, p) edge list", seeded=True, fmt=False)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, required=True)

    p = add("gen-shell", "random graph with a given shell distribution", seeded=True, fmt=False)
    p.add_argument("counts", type=parse_counts, help="comma-separated c_1,...,c_D")

    p = add("gen-tree", "complete j-ary tree (or its primed variant)", fmt=False)
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--levels", type=int, required=True)
    p.add_argument("--prime", action="store_true", help="add j vertices joined to every leaf")

    p = add("pmf", "analytic distribution of the one-round estimate on G(n, p)")
    p.add_argument("--mean-degree", type=float, required=True)
    p.add_argument("--kappa", type=int, default=10, help="largest kappa to tabulate")
    p.add_argument("--d-max", type=int, default=None)
    p.add_argument("--tail-tol", type=float, default=1e-9)

    p = add("cluster", "3-net clustering", needs_input=True, seeded=True)
    p.add_argument("--degree-biased", action="store_true")

    p = add("exposure", "exposure probabilities for every vertex", needs_input=True, seeded=True)
    p.add_argument("--kappa", type=int, required=True)
    p.add_argument("--p", type=probability, required=True)
    p.add_argument("--trials", type=int, default=0, help="Monte Carlo core-exposure trials (0: skip)")
    p.add_argument("--degree-biased", action="store_true")
    p.add_argument("--limit", type=int, default=NEIGHBOR_LIMIT,
                   help="max clusters within two hops for exact neighbour-degree exposure")

    p = add("stats", "graph summary and neighbourhood-size statistics", needs_input=True)
    p.add_argument("--delta", type=parse_delta, default=parse_delta("1..4"))
    return parser


# ------------------------------------------------------------------ output


def _fmt(x: Any) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _csv(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def _json(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n"


def _jsonable(x: Any):
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not serialisable: {type(x).__name__}")


def write_atomic(path: str, text: str) -> None:
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".corescope-", dir=folder)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def file_digest(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


# ---------------------------------------------------------------- commands


class Artifact:
    """Rendered output plus a summary that goes into the metadata sidecar."""

    def __init__(self, text: str, summary: dict | None = None):
        self.text = text
        self.summary = summary or {}


def _load(args) -> Graph:
    g, report = read_edge_list(args.input)
    args._parse_report = report
    return g


def _decompose(g: Graph):
    d = core_decomposition(g)
    if d.isolated:
        log.warning("%d isolated vertices assigned core number 0", d.isolated)
    return d


def _estimates(g: Graph, deltas: tuple[int, ...], which: str):
    top = max(deltas)
    tables = {}
    if which in ("hat", "both"):
        tables["hat"] = propagate_all(g, top).restrict(deltas)
    if which in ("breve", "both"):
        tables["breve"] = induced_all(g, top).restrict(deltas)
    return tables


def cmd_cores(args) -> Artifact:
    g = _load(args)
    d = _decompose(g)
    summary = {"degeneracy": d.degeneracy, "shell_distribution": list(d.shell_sizes),
               "isolated": d.isolated}
    if args.format == "json":
        body = dict(summary, core={g.label(v): int(d.core[v]) for v in range(g.n)})
        return Artifact(_json(body), summary)
    return Artifact(_csv(("vertex", "core"), ((g.label(v), int(d.core[v])) for v in range(g.n))), summary)


def cmd_estimate(args) -> Artifact:
    g = _load(args)
    tables = _estimates(g, args.delta, args.estimator)
    names = list(tables)
    if args.format == "json":
        body = {name: {str(d): t.column(d) for d in args.delta} for name, t in tables.items()}
        body["vertices"] = [g.label(v) for v in range(g.n)]
        return Artifact(_json(body))
    rows = ((g.label(v), d, *(int(tables[k].column(d)[v]) for k in names))
            for v in range(g.n) for d in args.delta)
    return Artifact(_csv(("vertex", "delta", *names), rows))


def cmd_ratio(args) -> Artifact:
    g = _load(args)
    decomp = _decompose(g)
    tables = _estimates(g, args.delta, args.estimator)
    reports = {k: ratio_report(t, decomp, exclude_zero_core=True, bins=args.bins)
               for k, t in tables.items()}
    summary = {
        "excluded_zero_core": next(iter(reports.values())).excluded,
        "optimal_fraction": {k: {str(d): r.optimal_fraction(d) for d in args.delta}
                             for k, r in reports.items()},
    }
    if args.format == "json":
        body = dict(summary, summaries={
            k: [s.__dict__ for s in r.summaries] for k, r in reports.items()})
        return Artifact(_json(body), summary)
    rows = []
    for k, r in reports.items():
        t = tables[k]
        for i, v in enumerate(r.vertices.tolist()):
            for j, d in enumerate(r.deltas):
                rows.append((g.label(v), d, t.kind, int(t.column(d)[v]), int(decomp.core[v]),
                             float(r.ratios[i, j])))
    return Artifact(_csv(("vertex", "delta", "kind", "estimate", "core", "ratio"), rows), summary)


def _graph_artifact(g: Graph) -> Artifact:
    return Artifact(to_edge_list(g, use_labels=False), {"n": g.n, "m": g.m})


def cmd_gen_er(args) -> Artifact:
    return _graph_artifact(gen_erdos_renyi(args.n, args.p, args.seed))


def cmd_gen_shell(args) -> Artifact:
    return _graph_artifact(gen_shell_distribution(args.counts, args.seed))


def cmd_gen_tree(args) -> Artifact:
    make = gen_tree_prime if args.prime else gen_complete_ary_tree
    g, root = make(args.j, args.levels)
    art = _graph_artifact(g)
    art.summary["root"] = root
    return art


def cmd_pmf(args) -> Artifact:
    pmf = analytic_khat1_pmf(args.mean_degree, args.kappa, args.d_max, args.tail_tol)
    summary = {"mean_degree": pmf.mean_degree, "d_max": pmf.d_max, "kappa_max": pmf.kappa_max,
               "tail_mass": pmf.tail_mass, "degree_tail": pmf.degree_tail,
               "tail_tolerance": pmf.tail_tolerance, "tail_exceeded": pmf.tail_exceeded}
    rows = list(enumerate(pmf.probabilities.tolist()))
    if args.format == "json":
        return Artifact(_json(dict(summary, probabilities=[p for _, p in rows])), summary)
    return Artifact(_csv(("kappa", "probability"), rows), summary)


def _clustering(g: Graph, args) -> Clustering:
    return three_net_clustering(g, args.seed, args.degree_biased)


def cmd_cluster(args) -> Artifact:
    g = _load(args)
    cl = _clustering(g, args)
    summary = {"clusters": cl.count}
    rows = [(g.label(v), int(cl.cluster_of[v]), g.label(cl.centers[cl.cluster_of[v]]))
            for v in range(g.n)]
    if args.format == "json":
        return Artifact(_json(dict(summary, assignment=[dict(zip(("vertex", "cluster", "center"), r))
                                                         for r in rows])), summary)
    return Artifact(_csv(("vertex", "cluster", "center"), rows), summary)


def cmd_exposure(args) -> Artifact:
    g = _load(args)
    if args.kappa < 0:
        raise UsageError("kappa must be non-negative")
    cl = _clustering(g, args)
    deg = degree_exposure_all(g, cl, args.kappa, args.p)
    pruned = degree_exposure_all(g, cl, args.kappa, args.p, pruned=True)
    nbr = neighbor_degree_exposure_all(g, cl, args.kappa, args.p, limit=args.limit)
    header = ["vertex", "kappa", "p", "degree_prob", "neighbor_degree_prob", "pruned_degree_prob"]
    cols = [deg, nbr, pruned]
    if args.trials > 0:
        hits = monte_carlo_core_exposure_all(g, cl, [args.kappa], args.p, args.trials, args.seed)[0]
        header += ["mc_core_estimate", "mc_halfwidth"]
        cols += [hits / args.trials, 1.96 * binomial_standard_error(hits, args.trials)]
    rows = [(g.label(v), args.kappa, args.p, *(float(c[v]) for c in cols)) for v in range(g.n)]
    summary = {"clusters": cl.count}
    if args.format == "json":
        return Artifact(_json(dict(summary, rows=[dict(zip(header, r)) for r in rows])), summary)
    return Artifact(_csv(header, rows), summary)


def cmd_stats(args) -> Artifact:
    g = _load(args)
    d = _decompose(g)
    diam = diameter(g)
    body = {"n": g.n, "m": g.m, "max_degree": g.max_degree(), "degeneracy": d.degeneracy,
            "diameter": diam.diameter, "components": diam.components,
            "largest_component": diam.largest_component_size}
    per_delta = [s.__dict__ for s in neighborhood_size_stats(g, args.delta)]
    if args.format == "json":
        return Artifact(_json(dict(body, neighborhood=per_delta)), body)
    rows = [(k, v) for k, v in body.items()]
    for s in per_delta:
        for key in ("mean", "max", "variance", "mean_fraction", "variance_fraction"):
            rows.append((f"N{s['delta']}_{key}", s[key]))
    return Artifact(_csv(("statistic", "value"), rows), body)


HANDLERS: dict[str, Callable[[argparse.Namespace], Artifact]] = {
    "cores": cmd_cores, "estimate": cmd_estimate, "ratio": cmd_ratio,
    "gen-er": cmd_gen_er, "gen-shell": cmd_gen_shell, "gen-tree": cmd_gen_tree,
    "pmf": cmd_pmf, "cluster": cmd_cluster, "exposure": cmd_exposure, "stats": cmd_stats,
}

_NOT_PARAMS = {"command", "input", "output", "seed", "_parse_report"}


def _params(args) -> dict:
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in _NOT_PARAMS:
            continue
        if isinstance(v, ShellDistribution):
            v = list(v.counts)
        elif isinstance(v, tuple):
            v = [v[0], v[-1]] if k == "delta" else list(v)
        out[k] = v
    return out


def metadata(args, art: Artifact) -> dict:
    meta = {
        "tool": "corescope",
        "version": __version__,
        "command": args.command,
        "seed": getattr(args, "seed", None),
        "input": os.path.basename(args.input) if getattr(args, "input", None) else None,
        "input_sha256": file_digest(args.input) if getattr(args, "input", None) else None,
        "params": _params(args),
        "summary": art.summary,
    }
    report = getattr(args, "_parse_report", None)
    if report is not None:
        meta["parse"] = report.__dict__
    return meta


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        art = HANDLERS[args.command](args)
        if args.output:
            write_atomic(args.output, art.text)
            write_atomic(args.output + ".meta.json", _json(metadata(args, art)))
        else:
            sys.stdout.write(art.text)
            sys.stdout.flush()
    except BrokenPipeError:
        # reader went away (e.g. piped into head); nothing left to report
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 1
    except (CorescopeError, ValueError, IndexError, OSError) as exc:
        _emit_error(type(exc).__name__, str(exc).replace("\n", " "))
        return 1
    return 0
