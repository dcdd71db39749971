"""Local core-number estimators and the estimate-ratio metric.

Two estimators are provided:

* the *propagating* estimator, an upper bound that starts from the degree
  and repeatedly applies the max-min step over neighbour bounds; it is
  non-increasing in the radius ``delta``;
* the *induced* estimator, the core number of ``v`` inside the subgraph
  induced on its ``delta``-ball; a lower bound, non-decreasing in ``delta``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .cores import CoreDecomposition, core_decomposition
from .graph import Graph, induced_subgraph, neighborhood

PROPAGATING = "propagating"
INDUCED = "induced"


def upper_bound_step(deg: int, neighbor_bounds: Sequence[int]) -> int:
    """max over i of min(psi(u_i), deg - i + 1) with bounds sorted ascending.

    Given upper bounds on the core numbers of a vertex's ``deg`` neighbours,
    this is an upper bound on the vertex's own core number (and equals it
    when the bounds are exact core numbers).  Sorting is a counting sort over
    ``0..deg``, so the cost is O(deg).
    """
    if len(neighbor_bounds) != deg:
        raise ValueError(f"expected {deg} neighbour bounds, got {len(neighbor_bounds)}")
    counts = [0] * (deg + 1)
    for b in neighbor_bounds:
        if b < 0:
            raise ValueError("bounds must be non-negative")
        counts[min(int(b), deg)] += 1
    best = 0
    i = 1
    for val, c in enumerate(counts):
        if c:
            best = max(best, min(val, deg - i + 1))
            i += c
    return best


def propagate_estimate(g: Graph, v: int, delta: int) -> int:
    """Propagating estimate at ``v`` using only the ``delta``-ball of ``v``.

    Round ``r`` refines every vertex at distance ``<= delta - r`` from the
    previous round's values, so information flows inward until it reaches
    ``v``; the work is O(delta * |E_delta(v)|).
    """
    v = g.check_vertex(v)
    if delta < 0:
        raise ValueError("delta must be non-negative")
    if delta == 0:
        return g.degree(v)
    dist = neighborhood(g, v, delta).distance
    value = {u: g.degree(u) for u in dist}
    for r in range(1, delta + 1):
        value = {
            u: upper_bound_step(g.degree(u), [value[w] for w in g.neighbors(u).tolist()])
            for u, du in dist.items() if du <= delta - r
        }
    return value[v]


@dataclass(frozen=True)
class EstimateTable:
    """Per-vertex estimates for every radius in ``deltas``.

    ``values[v, i]`` is the estimate at radius ``deltas[i]``.
    """

    kind: str
    deltas: tuple[int, ...]
    values: np.ndarray = field(repr=False)
    exact_core: np.ndarray | None = field(default=None, repr=False)

    def column(self, delta: int) -> np.ndarray:
        return self.values[:, self.deltas.index(delta)]

    def restrict(self, deltas: Sequence[int]) -> "EstimateTable":
        idx = [self.deltas.index(d) for d in deltas]
        return EstimateTable(self.kind, tuple(deltas), self.values[:, idx], self.exact_core)

    def with_core(self, core: np.ndarray) -> "EstimateTable":
        return EstimateTable(self.kind, self.deltas, self.values, np.asarray(core))


def propagate_all(g: Graph, delta: int) -> EstimateTable:
    """Propagating estimates for all vertices and radii ``0..delta``.

    Each round reads only the previous round's values, so the per-vertex
    entries match :func:`propagate_estimate` exactly.
    """
    if delta < 0:
        raise ValueError("delta must be non-negative")
    vals = _kernels.propagate_rounds(g.indptr, g.indices, int(delta))
    return EstimateTable(PROPAGATING, tuple(range(delta + 1)), vals)


def induced_estimate(g: Graph, v: int, delta: int) -> int:
    """Core number of ``v`` in the subgraph induced on its ``delta``-ball."""
    v = g.check_vertex(v)
    if delta < 0:
        raise ValueError("delta must be non-negative")
    ball = neighborhood(g, v, delta)
    sub, mapping = induced_subgraph(g, ball.members)
    return int(core_decomposition(sub).core[mapping[v]])


def induced_all(g: Graph, delta: int) -> EstimateTable:
    """Induced estimates for all vertices and radii ``0..delta``."""
    if delta < 0:
        raise ValueError("delta must be non-negative")
    vals = _kernels.induced_chains(g.indptr, g.indices, int(delta))
    return EstimateTable(INDUCED, tuple(range(delta + 1)), vals)


@dataclass(frozen=True)
class RatioSummary:
    delta: int
    optimal_fraction: float
    nonoptimal: int
    histogram: tuple[int, ...]
    bin_edges: tuple[float, ...]


@dataclass(frozen=True)
class RatioReport:
    """Estimate / true core number per vertex and per radius.

    ``ratios[i, j]`` belongs to vertex ``vertices[i]`` at ``deltas[j]``.
    Vertices with core number 0 are left out and counted in ``excluded``.
    """

    kind: str
    deltas: tuple[int, ...]
    vertices: np.ndarray = field(repr=False)
    ratios: np.ndarray = field(repr=False)
    excluded: int
    summaries: tuple[RatioSummary, ...]

    def optimal_fraction(self, delta: int) -> float:
        return self.summaries[self.deltas.index(delta)].optimal_fraction

    def ratio(self, v: int, delta: int) -> float:
        i = int(np.searchsorted(self.vertices, v))
        if i >= self.vertices.size or self.vertices[i] != v:
            raise KeyError(f"vertex {v} was excluded from the report")
        return float(self.ratios[i, self.deltas.index(delta)])


def ratio_report(estimates: EstimateTable, decomp: CoreDecomposition, *,
                 exclude_zero_core: bool = False, bins: int | Sequence[float] = 10) -> RatioReport:
    """Core-number estimate ratios with per-radius summaries.

    Non-optimal ratios (those != 1) are histogrammed with ``numpy.histogram``
    using ``bins``.

    Raises:
        ValueError: the tables cover different vertex counts, or a vertex
            has core number 0 and ``exclude_zero_core`` is false.
    """
    core = np.asarray(decomp.core)
    if core.shape[0] != estimates.values.shape[0]:
        raise ValueError("estimates and decomposition cover different vertex sets")
    zero = core == 0
    if zero.any() and not exclude_zero_core:
        raise ValueError(f"{int(zero.sum())} vertices have core number 0; "
                         "pass exclude_zero_core=True to drop them")
    keep = np.flatnonzero(~zero)
    ratios = estimates.values[keep].astype(np.float64) / core[keep, None]
    summaries = []
    for j, d in enumerate(estimates.deltas):
        col = ratios[:, j]
        off = col[col != 1.0]
        hist, edges = np.histogram(off, bins=bins) if off.size else (np.zeros(0, np.int64), np.zeros(0))
        summaries.append(RatioSummary(
            delta=d,
            optimal_fraction=float((col == 1.0).mean()) if col.size else 1.0,
            nonoptimal=int(off.size),
            histogram=tuple(int(x) for x in hist),
            bin_edges=tuple(float(x) for x in edges),
        ))
    return RatioReport(estimates.kind, estimates.deltas, keep, ratios,
                       int(zero.sum()), tuple(summaries))
