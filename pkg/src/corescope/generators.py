"""Synthetic graphs and the analytic distribution of the one-round estimate.

* :func:`gen_erdos_renyi` -- G(n, p) by geometric skipping over vertex pairs.
* :func:`gen_shell_distribution` -- a random graph whose core decomposition
  reproduces a prescribed shell distribution exactly.
* :func:`gen_complete_ary_tree`, :func:`gen_tree_prime` -- the extremal
  trees on which the two local estimators err by ``j - 1``.
* :func:`analytic_khat1_pmf` -- P[khat_1(v) = kappa] on G(n, p) in the
  sparse limit, as a Poisson mixture.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats
from scipy.special import gammaln

from .cores import ShellDistribution
from .errors import GenerationError
from .graph import Graph

log = logging.getLogger(__name__)

__all__ = [
    "ShellDistribution",
    "Khat1Pmf",
    "gen_erdos_renyi",
    "gen_shell_distribution",
    "shell_growth_steps",
    "GrowthStep",
    "gen_complete_ary_tree",
    "gen_tree_prime",
    "analytic_khat1_pmf",
    "default_d_max",
]


def _rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(int(seed))


def gen_erdos_renyi(n: int, p: float, seed: int) -> Graph:
    """Sample G(n, p).

    Pairs ``(v, w)`` with ``w < v`` are visited in lexicographic order; the
    gap to the next edge is geometric, so expected cost is O(n + m).
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if n < 0:
        raise ValueError("n must be non-negative")
    total = n * (n - 1) // 2
    if p == 0.0 or total == 0:
        return Graph.from_edges(n, np.empty((0, 2), np.int64))
    if p == 1.0:
        idx = np.arange(total, dtype=np.int64)
    else:
        rng = _rng(seed)
        chunks = []
        pos = -1
        batch = max(1024, int(total * p * 1.1) + 64)
        while pos < total:
            gaps = rng.geometric(p, size=batch)
            cum = pos + np.cumsum(gaps)
            chunks.append(cum[cum < total])
            pos = int(cum[-1])
        idx = np.concatenate(chunks)
    # linear index k -> (v, w) with k = v(v-1)/2 + w, 0 <= w < v
    v = ((1 + np.sqrt(1 + 8 * idx.astype(np.float64))) // 2).astype(np.int64)
    v -= (v * (v - 1) // 2) > idx
    v += ((v + 1) * v // 2) <= idx
    w = idx - v * (v - 1) // 2
    return Graph.from_edges(n, np.stack([v, w], axis=1))


@dataclass(frozen=True)
class GrowthStep:
    """One top-up: ``vertex`` of shell ``shell`` had ``degree_before`` and was
    joined to ``partners``."""

    shell: int
    vertex: int
    degree_before: int
    partners: tuple[int, ...]


def shell_growth_steps(dist: ShellDistribution, seed: int) -> tuple[int, list[GrowthStep]]:
    """Vertex count and the ordered top-up steps behind :func:`gen_shell_distribution`.

    Raises:
        GenerationError: see :func:`gen_shell_distribution`.
    """
    bad = dist.infeasible_shell()
    if bad is not None:
        raise GenerationError(
            f"shell {bad} is infeasible: needs at least {bad + 1} vertices in shells >= {bad}")
    rng = _rng(seed)
    adj: list[set[int]] = []
    steps: list[GrowthStep] = []
    for i in range(dist.degeneracy, 0, -1):
        first = len(adj)
        adj.extend(set() for _ in range(dist.count(i)))
        present = len(adj)
        for v in range(first, present):
            need = i - len(adj[v])
            if need <= 0:
                continue
            free = present - 1 - len(adj[v])
            if free < need:
                raise GenerationError(f"shell {i}: vertex {v} needs {need} partners, only {free} available")
            picks = _sample_non_adjacent(rng, present, v, adj[v], need, free)
            steps.append(GrowthStep(i, v, len(adj[v]), tuple(picks)))
            for u in picks:
                adj[v].add(u)
                adj[u].add(v)
    return len(adj), steps


def gen_shell_distribution(dist: ShellDistribution, seed: int) -> Graph:
    """Random graph whose shell sizes are exactly ``dist.counts``.

    Shells are built from the deepest (``D``) to the shallowest.  All
    ``c_i`` vertices of shell ``i`` are added first; then, in ascending id
    order, each one still below degree ``i`` is joined to ``i - d(v)``
    vertices drawn uniformly without replacement from the vertices already
    present that are neither ``v`` nor adjacent to it.

    Raises:
        GenerationError: some non-empty shell ``i`` has fewer than ``i + 1``
            vertices at depth ``>= i``, so degree ``i`` cannot be reached.
    """
    n, steps = shell_growth_steps(dist, seed)
    edges = [(st.vertex, u) for st in steps for u in st.partners]
    return Graph.from_edges(n, np.asarray(edges, dtype=np.int64).reshape(-1, 2))


def _sample_non_adjacent(rng, present, v, nbrs, need, free):
    if 4 * need <= free:
        picks: list[int] = []
        taken = set(nbrs)
        taken.add(v)
        while len(picks) < need:
            u = int(rng.integers(present))
            if u not in taken:
                taken.add(u)
                picks.append(u)
        return picks
    pool = np.array([u for u in range(present) if u != v and u not in nbrs], dtype=np.int64)
    return rng.choice(pool, size=need, replace=False).tolist()


def _ary_tree_edges(j: int, levels: int) -> tuple[int, list[tuple[int, int]]]:
    n = sum(j ** i for i in range(levels))
    edges = [(x, c) for x in range(n) for c in range(j * x + 1, j * x + j + 1) if c < n]
    return n, edges


def gen_complete_ary_tree(j: int, levels: int) -> tuple[Graph, int]:
    """Complete ``j``-ary tree with ``levels`` levels, root id 0.

    Vertices are numbered breadth-first; children of ``x`` are
    ``j*x + 1 .. j*x + j``.
    """
    if j < 2 or levels < 2:
        raise ValueError("need j >= 2 and levels >= 2")
    n, edges = _ary_tree_edges(j, levels)
    return Graph.from_edges(n, edges), 0


def gen_tree_prime(j: int, levels: int) -> tuple[Graph, int]:
    """The ``j``-ary tree plus ``j`` extra vertices, each adjacent to every leaf.

    The extra vertices take the ids after the tree's.
    """
    if j < 2 or levels < 2:
        raise ValueError("need j >= 2 and levels >= 2")
    n, edges = _ary_tree_edges(j, levels)
    first_leaf = n - j ** (levels - 1)
    extra = range(n, n + j)
    edges += [(w, leaf) for w in extra for leaf in range(first_leaf, n)]
    return Graph.from_edges(n + j, edges), 0


@dataclass(frozen=True)
class Khat1Pmf:
    """P[khat_1 = kappa] for kappa = 0..kappa_max on sparse G(n, p).

    ``tail_mass`` is ``1 - sum(probabilities)``: the mass on values above
    ``kappa_max`` plus what the degree truncation at ``d_max`` lost.
    ``degree_tail`` is the Poisson mass beyond ``d_max`` alone.
    """

    mean_degree: float
    kappa_max: int
    d_max: int
    probabilities: np.ndarray = field(repr=False)
    tail_mass: float
    degree_tail: float
    tail_tolerance: float
    tail_exceeded: bool

    def __getitem__(self, kappa: int) -> float:
        return float(self.probabilities[kappa])


def default_d_max(mean_degree: float, kappa_max: int) -> int:
    return int(math.ceil(mean_degree + 12 * math.sqrt(mean_degree))) + kappa_max


def _log(x: float) -> float:
    return math.log(x) if x > 0 else -math.inf


def _term(count: int, logp: float) -> float:
    # count * log p with the convention 0 * log 0 = 0
    return 0.0 if count == 0 else count * logp


def conditional_khat1(kappa: int, d: int, mean_degree: float) -> float:
    """P[khat_1(v) = kappa | d(v) = d] in the sparse limit.

    A neighbour's degree is one plus a Poisson(mean_degree) variable, so it
    is ``> kappa`` with probability ``1 - Z(kappa - 1)``, ``< kappa`` with
    ``Z(kappa - 2)`` and ``== kappa`` with ``zeta(kappa - 1)``.  The value is
    exactly ``kappa`` iff at most ``kappa`` neighbours exceed ``kappa`` and at
    least ``kappa`` reach it; the multinomial sum runs over those splits.
    """
    if d < kappa or kappa < 0:
        return 0.0
    lam = mean_degree
    log_above = _log(float(stats.poisson.sf(kappa - 1, lam)))
    log_below = _log(float(stats.poisson.cdf(kappa - 2, lam)))
    log_equal = _log(float(stats.poisson.pmf(kappa - 1, lam)))
    total = 0.0
    lgd = gammaln(d + 1)
    for i in range(0, kappa + 1):
        for j in range(0, d - kappa + 1):
            x = d - i - j
            if x < 0:
                continue
            logt = (lgd - gammaln(i + 1) - gammaln(j + 1) - gammaln(x + 1)
                    + _term(i, log_above) + _term(j, log_below) + _term(x, log_equal))
            if logt > -math.inf:
                total += math.exp(logt)
    return total


def analytic_khat1_pmf(mean_degree: float, kappa_max: int, d_max: int | None = None,
                       tail_tolerance: float = 1e-9) -> Khat1Pmf:
    """Distribution of the one-round propagating estimate on sparse G(n, p).

    Mixes :func:`conditional_khat1` over a Poisson(mean_degree) degree for
    ``d = kappa..d_max``.  When the leftover mass exceeds ``tail_tolerance``
    the result carries ``tail_exceeded=True`` and a warning is logged.
    """
    if mean_degree <= 0:
        raise ValueError("mean_degree must be positive")
    if kappa_max < 0:
        raise ValueError("kappa_max must be non-negative")
    if d_max is None:
        d_max = default_d_max(mean_degree, kappa_max)
    if d_max < kappa_max:
        raise ValueError("d_max must be >= kappa_max")
    degree_w = stats.poisson.pmf(np.arange(d_max + 1), mean_degree)
    probs = np.zeros(kappa_max + 1)
    for kappa in range(kappa_max + 1):
        probs[kappa] = sum(degree_w[d] * conditional_khat1(kappa, d, mean_degree)
                           for d in range(kappa, d_max + 1))
    tail = float(max(0.0, 1.0 - probs.sum()))
    exceeded = tail > tail_tolerance
    if exceeded:
        log.warning("khat1 pmf tail mass %.3g exceeds tolerance %.3g", tail, tail_tolerance)
    return Khat1Pmf(
        mean_degree=float(mean_degree), kappa_max=int(kappa_max), d_max=int(d_max),
        probabilities=probs, tail_mass=tail,
        degree_tail=float(stats.poisson.sf(d_max, mean_degree)),
        tail_tolerance=float(tail_tolerance), tail_exceeded=exceeded,
    )
