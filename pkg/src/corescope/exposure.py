"""Exposure probabilities under cluster-randomised treatment.

Clusters come from a 3-net (radius-2 balls around random centres); each
cluster is treated independently with probability ``p``.  For a vertex v and
level kappa the module computes

* absolute degree exposure -- v and at least kappa neighbours treated --
  exactly, by a DP over the clusters touching v;
* neighbour-degree exposure -- v treated and at least kappa neighbours
  themselves degree-exposed -- exactly, by branch and bound over the
  clusters within two hops;
* core exposure -- v in the kappa-core of the treated subgraph -- by Monte
  Carlo, since no exact method is known.

Core exposure implies neighbour-degree exposure, which implies degree
exposure, on every single treatment pattern.
"""
from __future__ import annotations

import itertools
import logging
import math
import os
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import _kernels
from .cores import core_decomposition
from .errors import ExposureLimitError, OracleRefusal
from .graph import Graph, connected_components, induced_subgraph, neighborhood

log = logging.getLogger(__name__)

DEGREE = "degree"
NEIGHBOR_DEGREE = "neighbor_degree"
PRUNED_DEGREE = "pruned_degree"
CORE_MONTE_CARLO = "core_monte_carlo"
CORE = "core"

ORACLE_LIMIT = 20
NEIGHBOR_LIMIT = 24
MAX_NEIGHBOR_LIMIT = 62
THREADS_ENV = "CORESCOPE_THREADS"


@dataclass(frozen=True)
class Clustering:
    """A partition of the vertices with one designated centre per cluster."""

    cluster_of: np.ndarray = field(repr=False)
    clusters: tuple[tuple[int, ...], ...] = field(repr=False)
    centers: tuple[int, ...]

    @classmethod
    def from_assignment(cls, cluster_of: Sequence[int],
                        centers: Sequence[int] | None = None) -> "Clustering":
        """Clusters from a per-vertex id array (ids must be 0..k-1).

        Centres default to the smallest member of each cluster.
        """
        arr = np.asarray(cluster_of, dtype=np.int64)
        if arr.size and arr.min() < 0:
            raise ValueError("cluster ids must be non-negative")
        k = int(arr.max()) + 1 if arr.size else 0
        members: list[list[int]] = [[] for _ in range(k)]
        for v, c in enumerate(arr.tolist()):
            members[c].append(v)
        if any(not m for m in members):
            raise ValueError("cluster ids must be contiguous")
        if centers is None:
            centers = [m[0] for m in members]
        centers = tuple(int(c) for c in centers)
        if len(centers) != k or any(arr[c] != i for i, c in enumerate(centers)):
            raise ValueError("each centre must lie in its own cluster")
        arr.flags.writeable = False
        return cls(arr, tuple(tuple(m) for m in members), centers)

    @property
    def count(self) -> int:
        return len(self.clusters)

    def validate(self, g: Graph) -> None:
        """Raise ``ValueError`` unless this is a partition of ``g`` in which
        every vertex is within two hops of its centre."""
        if self.cluster_of.size != g.n:
            raise ValueError("clustering does not cover the graph")
        seen = sorted(v for c in self.clusters for v in c)
        if seen != list(range(g.n)):
            raise ValueError("clusters do not partition the vertices")
        for i, c in enumerate(self.centers):
            ball = neighborhood(g, c, 2)
            far = [v for v in self.clusters[i] if v not in ball]
            if far:
                raise ValueError(f"cluster {i}: vertex {far[0]} is more than 2 hops from centre {c}")


def three_net_clustering(g: Graph, seed: int, degree_biased: bool = False) -> Clustering:
    """Grow radius-2 balls around random uncovered centres until all are covered.

    Centres are the uncovered vertices in a random order: a uniform
    shuffle, or with ``degree_biased`` the order of ``Exp(1) / d(v)`` keys,
    which picks each next centre with probability proportional to degree
    among those still uncovered (isolated vertices go last).  A ball claims
    only uncovered vertices; distances are measured in the whole graph.
    """
    rng = np.random.default_rng(int(seed))
    if degree_biased:
        deg = g.degrees.astype(np.float64)
        keys = rng.exponential(size=g.n)
        with np.errstate(divide="ignore"):
            keys = np.where(deg > 0, keys / np.where(deg > 0, deg, 1), np.inf)
        order = np.argsort(keys, kind="stable")
    else:
        order = rng.permutation(g.n)
    cluster_of = np.full(g.n, -1, dtype=np.int64)
    centers: list[int] = []
    for c in order.tolist():
        if cluster_of[c] >= 0:
            continue
        ball = np.fromiter(neighborhood(g, c, 2).distance, dtype=np.int64)
        ball = ball[cluster_of[ball] < 0]
        cluster_of[ball] = len(centers)
        centers.append(c)
    return Clustering.from_assignment(cluster_of, centers)


@dataclass(frozen=True)
class ExposureProfile:
    """Edges from ``vertex`` into each cluster touching its closed neighbourhood.

    ``clusters[i]`` receives ``w[i]`` edges; foreign clusters come in
    ascending id order and v's own cluster is last, so ``s = len(w)``.
    """

    vertex: int
    clusters: tuple[int, ...]
    w: tuple[int, ...]
    p: float

    @property
    def s(self) -> int:
        return len(self.w)


@dataclass(frozen=True)
class ExposureResult:
    kind: str
    kappa: int
    probability: float
    diagnostics: Mapping[str, float] = field(default_factory=dict)


def _check_p(p: float) -> float:
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie strictly between 0 and 1, got {p}")
    return float(p)


def exposure_profile(g: Graph, clustering: Clustering, v: int, p: float) -> ExposureProfile:
    p = _check_p(p)
    v = g.check_vertex(v)
    own = int(clustering.cluster_of[v])
    counts = Counter(int(clustering.cluster_of[u]) for u in g.neighbors(v).tolist())
    foreign = sorted(c for c in counts if c != own)
    return ExposureProfile(
        vertex=v,
        clusters=tuple(foreign) + (own,),
        w=tuple(counts[c] for c in foreign) + (counts.get(own, 0),),
        p=p,
    )


def degree_exposure_curve(profile: ExposureProfile, kappa_max: int) -> np.ndarray:
    """P[X_i] for i = 0..kappa_max in one O(s * kappa_max) pass."""
    if kappa_max < 0:
        raise ValueError("kappa must be non-negative")
    w = np.asarray(profile.w, dtype=np.int64)
    return _kernels.degree_curve(w, w.size, int(kappa_max), profile.p)


def degree_exposure_prob(profile: ExposureProfile, kappa: int) -> ExposureResult:
    """Exact probability that v and at least ``kappa`` of its neighbours are treated.

    ``f(j, T)`` is the chance that the first j foreign clusters supply at
    least T treated edges, with ``f(0, T) = 1[T <= 0]`` and
    ``f(j, T) = p f(j-1, T - w_j) + (1 - p) f(j-1, T)``; the answer is
    ``p f(s-1, kappa - w_s)``.
    """
    prob = float(degree_exposure_curve(profile, kappa)[kappa])
    return ExposureResult(DEGREE, int(kappa), prob, {"s": profile.s})


def _treated_pattern_prob(k: int, total: int, p: float) -> float:
    return p ** k * (1.0 - p) ** (total - k)


def brute_force_exposure_oracle(g: Graph, clustering: Clustering, v: int, kappa: int,
                                p: float, kind: str) -> float:
    """Exact exposure probability by enumerating every treatment of the
    relevant clusters.

    Relevant clusters: those touching v's closed neighbourhood (degree),
    its 2-hop ball (neighbour-degree) or its connected component (core).
    The event is evaluated directly on each pattern; core exposure runs a
    full core decomposition of the treated induced subgraph.

    Raises:
        OracleRefusal: more than 20 relevant clusters.
    """
    p = _check_p(p)
    v = g.check_vertex(v)
    cof = clustering.cluster_of
    if kind == DEGREE:
        region = {v, *g.neighbors(v).tolist()}
    elif kind == NEIGHBOR_DEGREE:
        region = set(neighborhood(g, v, 2).distance)
    elif kind == CORE:
        label, _ = connected_components(g)
        region = set(np.flatnonzero(label == label[v]).tolist())
    else:
        raise ValueError(f"unknown exposure kind {kind!r}")
    relevant = sorted({int(cof[u]) for u in region})
    if len(relevant) > ORACLE_LIMIT:
        raise OracleRefusal(f"{len(relevant)} relevant clusters exceed the oracle limit {ORACLE_LIMIT}")
    nbrs = g.neighbors(v).tolist()
    terms = []
    for bits in itertools.product((False, True), repeat=len(relevant)):
        on = {c for c, b in zip(relevant, bits) if b}
        treated = lambda x: int(cof[x]) in on  # noqa: E731
        if not treated(v):
            continue
        if kind == DEGREE:
            hit = sum(treated(u) for u in nbrs) >= kappa
        elif kind == NEIGHBOR_DEGREE:
            hit = sum(treated(u) and sum(treated(x) for x in g.neighbors(u).tolist()) >= kappa
                      for u in nbrs) >= kappa
        else:
            members = [x for x in region if treated(x)]
            sub, mapping = induced_subgraph(g, members)
            hit = int(core_decomposition(sub).core[mapping[v]]) >= kappa
        if hit:
            terms.append(_treated_pattern_prob(len(on), len(relevant), p))
    return math.fsum(terms)


def _binom_table(limit: int) -> np.ndarray:
    # exact Pascal triangle; float binomials lose digits past 2**53
    table = np.zeros((limit + 1, limit + 1), dtype=np.int64)
    for r in range(limit + 1):
        table[r, 0] = 1
        for j in range(1, r + 1):
            table[r, j] = table[r - 1, j - 1] + table[r - 1, j]
    return table


def _check_limit(limit: int) -> int:
    if not 0 <= limit <= MAX_NEIGHBOR_LIMIT:
        raise ValueError(f"limit must lie in 0..{MAX_NEIGHBOR_LIMIT} (subset counts are int64)")
    return int(limit)


def neighbor_degree_exposure_prob(g: Graph, clustering: Clustering, v: int, kappa: int,
                                  p: float, *, prune: bool = True,
                                  limit: int = NEIGHBOR_LIMIT) -> ExposureResult:
    """Exact probability that v is treated and at least ``kappa`` of its
    neighbours are ``kappa``-degree exposed.

    Every neighbour's exposure is decided by the clusters within two hops
    of v.  With v's cluster fixed as treated, the remaining clusters C are
    searched depth first, counting successful subsets by size; the result
    is ``sum_t N_t p^(t+1) (1-p)^(|C|-t)``.  Exposure is monotone in the
    treated set, which justifies both cuts in the search, so ``prune=False``
    (plain enumeration) returns the bit-identical value.

    Raises:
        ValueError: ``limit`` above 62, where subset counts could overflow.
        ExposureLimitError: ``|C|`` exceeds ``limit``; use
            :func:`monte_carlo_core_exposure` for an estimate instead.
    """
    p = _check_p(p)
    v = g.check_vertex(v)
    if kappa < 0:
        raise ValueError("kappa must be non-negative")
    limit = _check_limit(limit)
    loc = np.full(clustering.count, -1, dtype=np.int64)
    ids = np.empty(clustering.count, dtype=np.int64)
    L, M, cu = _kernels.neighbor_exposure_setup(
        g.indptr, g.indices, clustering.cluster_of, v, loc, ids, int(limit))
    if L > limit:
        raise ExposureLimitError(
            f"vertex {v}: {L} clusters within two hops exceed the limit {limit}; "
            "use Monte Carlo core exposure instead")
    counts, nodes, cut = _kernels.subset_counts(M, cu, L, int(kappa), bool(prune), _binom_table(L))
    prob = float(_kernels.counts_to_prob(counts, L, p))
    return ExposureResult(NEIGHBOR_DEGREE, int(kappa), prob, {
        "clusters": L, "explored": int(nodes), "pruned": int(cut),
        "subset_counts": tuple(int(x) for x in counts),
    })


def pruned_degree_exposure_prob(g: Graph, clustering: Clustering, v: int, kappa: int,
                                p: float) -> ExposureResult:
    """Degree exposure ignoring neighbours that can never be degree-exposed
    themselves at level ``kappa``."""
    p = _check_p(p)
    v = g.check_vertex(v)
    own = int(clustering.cluster_of[v])
    counts: Counter[int] = Counter()
    dropped = 0
    for u in g.neighbors(v).tolist():
        if degree_exposure_prob(exposure_profile(g, clustering, u, p), kappa).probability == 0.0:
            dropped += 1
            continue
        counts[int(clustering.cluster_of[u])] += 1
    foreign = sorted(c for c in counts if c != own)
    profile = ExposureProfile(v, tuple(foreign) + (own,),
                              tuple(counts[c] for c in foreign) + (counts.get(own, 0),), p)
    res = degree_exposure_prob(profile, kappa)
    return ExposureResult(PRUNED_DEGREE, int(kappa), res.probability,
                          {"s": profile.s, "dropped_neighbors": dropped})


def degree_exposure_all(g: Graph, clustering: Clustering, kappa: int, p: float,
                        *, pruned: bool = False) -> np.ndarray:
    """Degree (or pruned degree) exposure probability for every vertex."""
    p = _check_p(p)
    curves = _kernels.degree_curves_all(g.indptr, g.indices, clustering.cluster_of,
                                        clustering.count, int(kappa), p,
                                        int(kappa) if pruned else -1)
    return curves[:, kappa].copy()


def thread_count() -> int:
    cap = os.environ.get(THREADS_ENV)
    n = os.cpu_count() or 1
    if cap:
        n = min(n, max(1, int(cap)))
    return n


def _chunks(total: int, parts: int) -> list[tuple[int, int]]:
    edges = np.linspace(0, total, parts + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def neighbor_degree_exposure_all(g: Graph, clustering: Clustering, kappa: int, p: float,
                                 *, limit: int = NEIGHBOR_LIMIT) -> np.ndarray:
    """Neighbour-degree exposure for every vertex (threads over vertex ranges).

    Raises:
        ExposureLimitError: some vertex has more than ``limit`` clusters in
            its two-hop ball.
    """
    p = _check_p(p)
    limit = _check_limit(limit)
    binom = _binom_table(limit)
    args = (g.indptr, g.indices, clustering.cluster_of, clustering.count, int(kappa), p,
            int(limit), binom)
    parts = _chunks(g.n, thread_count())
    with ThreadPoolExecutor(max_workers=max(1, len(parts))) as pool:
        out = list(pool.map(lambda r: _kernels.neighbor_exposure_all(*args, *r), parts))
    res = np.concatenate(out) if out else np.zeros(0)
    bad = np.flatnonzero(np.isnan(res))
    if bad.size:
        raise ExposureLimitError(
            f"{bad.size} vertices (first: {int(bad[0])}) exceed {limit} clusters within two hops; "
            f"raise the limit (at most {MAX_NEIGHBOR_LIMIT}) or use Monte Carlo core exposure")
    return res


def treated_core_numbers(g: Graph, clustering: Clustering, treated: np.ndarray) -> np.ndarray:
    """Core numbers in the subgraph induced on treated clusters; -1 if untreated."""
    treated = np.asarray(treated, dtype=np.bool_)
    if treated.shape != (clustering.count,):
        raise ValueError("need one treatment flag per cluster")
    mask = treated[clustering.cluster_of]
    return _kernels.masked_core_numbers(g.indptr, g.indices, mask)


def _mc_hits(g: Graph, clustering: Clustering, kappas: np.ndarray, p: float, seed: int,
             lo: int, hi: int) -> np.ndarray:
    hits = np.zeros((len(kappas), g.n), dtype=np.int64)
    for t in range(lo, hi):
        treated = np.random.default_rng([int(seed), t]).random(clustering.count) < p
        core = treated_core_numbers(g, clustering, treated)
        hits += core[None, :] >= kappas[:, None]
    return hits


def monte_carlo_core_exposure_all(g: Graph, clustering: Clustering, kappas: Sequence[int],
                                  p: float, trials: int, seed: int) -> np.ndarray:
    """Hit counts ``[len(kappas), n]`` of core exposure over ``trials`` samples.

    Trial t draws its treatment from a generator seeded with ``(seed, t)``,
    so counts do not depend on how trials are split across threads.
    """
    p = _check_p(p)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    ks = np.asarray(kappas, dtype=np.int64)
    parts = _chunks(trials, thread_count())
    with ThreadPoolExecutor(max_workers=len(parts)) as pool:
        out = list(pool.map(lambda r: _mc_hits(g, clustering, ks, p, seed, *r), parts))
    return np.sum(out, axis=0)


def binomial_standard_error(hits, trials: int):
    est = np.asarray(hits, dtype=np.float64) / trials
    return np.sqrt(est * (1.0 - est) / trials)


def monte_carlo_core_exposure(g: Graph, clustering: Clustering, v: int, kappa: int,
                              p: float, trials: int, seed: int) -> ExposureResult:
    """Estimated probability that v lies in the kappa-core of the treated subgraph.

    Diagnostics report the trial count, the binomial standard error and a
    95% half-width (1.96 standard errors).
    """
    v = g.check_vertex(v)
    hits = int(monte_carlo_core_exposure_all(g, clustering, [kappa], p, trials, seed)[0, v])
    se = float(binomial_standard_error(hits, trials))
    return ExposureResult(CORE_MONTE_CARLO, int(kappa), hits / trials, {
        "trials": int(trials), "hits": hits, "std_error": se, "half_width": 1.96 * se,
    })
