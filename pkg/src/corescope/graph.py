"""Immutable simple undirected graphs in compressed (CSR) adjacency form.

Vertices are dense ids ``0..n-1``; the neighbour list of ``v`` is
``indices[indptr[v]:indptr[v+1]]``, sorted ascending.  Original string
labels from an edge-list file are kept alongside for output.
"""
from __future__ import annotations

import io
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _kernels
from .errors import GraphParseError

log = logging.getLogger(__name__)

COMMENT_PREFIXES = ("#", "%")


class Graph:
    """A simple, undirected, unweighted graph.

    Build one with :meth:`from_edges` or :func:`parse_edge_list`; the
    adjacency arrays are read-only after construction.
    """

    __slots__ = ("indptr", "indices", "labels", "_degrees")

    def __init__(self, indptr: np.ndarray, indices: np.ndarray,
                 labels: Sequence[str] | None = None):
        indptr = np.ascontiguousarray(indptr, dtype=np.int64)
        indices = np.ascontiguousarray(indices, dtype=np.int64)
        if indptr.ndim != 1 or indptr.size == 0 or indptr[0] != 0:
            raise ValueError("indptr must be a non-empty 1-d array starting at 0")
        if indptr[-1] != indices.size:
            raise ValueError("indptr[-1] must equal len(indices)")
        if labels is not None:
            labels = tuple(str(x) for x in labels)
            if len(labels) != indptr.size - 1:
                raise ValueError("one label per vertex required")
        indptr.flags.writeable = False
        indices.flags.writeable = False
        self.indptr = indptr
        self.indices = indices
        self.labels = labels
        deg = np.diff(indptr)
        deg.flags.writeable = False
        self._degrees = deg

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]] | np.ndarray,
                   labels: Sequence[str] | None = None) -> "Graph":
        """Build from an edge iterable over ids ``< n``.

        Self-loops are dropped and duplicate or reversed edges collapse to
        one undirected edge.
        """
        arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges,
                         dtype=np.int64).reshape(-1, 2)
        if arr.size and (arr.min() < 0 or arr.max() >= n):
            raise ValueError(f"edge endpoint outside 0..{n - 1}")
        arr = arr[arr[:, 0] != arr[:, 1]]
        lo = np.minimum(arr[:, 0], arr[:, 1])
        hi = np.maximum(arr[:, 0], arr[:, 1])
        key = np.unique(lo * max(n, 1) + hi)
        lo, hi = key // max(n, 1), key % max(n, 1)
        src = np.concatenate([lo, hi])
        dst = np.concatenate([hi, lo])
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
        return cls(indptr, dst, labels)

    @property
    def n(self) -> int:
        return self.indptr.size - 1

    @property
    def m(self) -> int:
        return self.indices.size // 2

    @property
    def degrees(self) -> np.ndarray:
        return self._degrees

    def degree(self, v: int) -> int:
        return int(self._degrees[v])

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        nbrs = self.neighbors(u)
        i = np.searchsorted(nbrs, v)
        return bool(i < nbrs.size and nbrs[i] == v)

    def edges(self) -> np.ndarray:
        """Canonical ``(u, v)`` pairs with ``u < v``, ascending."""
        src = np.repeat(np.arange(self.n, dtype=np.int64), self._degrees)
        keep = src < self.indices
        return np.stack([src[keep], self.indices[keep]], axis=1)

    def label(self, v: int) -> str:
        return self.labels[v] if self.labels is not None else str(v)

    def max_degree(self) -> int:
        return int(self._degrees.max()) if self.n else 0

    def check_vertex(self, v: int) -> int:
        if not 0 <= int(v) < self.n:
            raise IndexError(f"vertex {v} out of range for graph with n={self.n}")
        return int(v)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.indices, other.indices)
                and self.labels == other.labels)

    def __hash__(self) -> int:
        return hash((self.n, self.m, self.indices.tobytes()))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


@dataclass(frozen=True)
class ParseReport:
    lines: int
    edges_read: int
    self_loops: int
    duplicates: int


def _iter_lines(text) -> Iterable[str]:
    if isinstance(text, (bytes, bytearray)):
        text = text.decode("utf-8")
    if isinstance(text, str):
        return io.StringIO(text)
    return text


def parse_edge_list(text) -> tuple[Graph, ParseReport]:
    """Parse a whitespace-separated edge list.

    ``text`` may be a ``str``, ``bytes`` or any iterable of lines (an open
    file works).  Vertex tokens are re-indexed densely in order of first
    appearance and kept as labels.  Lines starting with ``#`` or ``%`` are
    comments.

    Raises:
        GraphParseError: a line does not hold exactly two tokens, or the
            input contains no vertices at all.
    """
    ids: dict[str, int] = {}
    src: list[int] = []
    dst: list[int] = []
    loops = 0
    lineno = 0
    for lineno, raw in enumerate(_iter_lines(text), 1):
        if isinstance(raw, (bytes, bytearray)):
            raw = raw.decode("utf-8")
        line = raw.strip()
        if not line or line.startswith(COMMENT_PREFIXES):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphParseError(f"expected 2 tokens, got {len(parts)}: {line!r}", lineno)
        a = ids.setdefault(parts[0], len(ids))
        b = ids.setdefault(parts[1], len(ids))
        if a == b:
            loops += 1
            continue
        src.append(a)
        dst.append(b)
    if not ids:
        raise GraphParseError("empty edge list")
    g = Graph.from_edges(len(ids), np.column_stack([src, dst]) if src else np.empty((0, 2)),
                         labels=list(ids))
    report = ParseReport(lines=lineno, edges_read=len(src), self_loops=loops,
                         duplicates=len(src) - g.m)
    if loops or report.duplicates:
        log.info("dropped %d self-loops and %d duplicate edges", loops, report.duplicates)
    return g, report


def read_edge_list(path) -> tuple[Graph, ParseReport]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_edge_list(fh)


def to_edge_list(g: Graph, use_labels: bool = True) -> str:
    """Serialize as one ``u v`` line per edge, ``u < v`` by id, ascending."""
    out = io.StringIO()
    for u, v in g.edges():
        if use_labels:
            out.write(f"{g.label(u)} {g.label(v)}\n")
        else:
            out.write(f"{u} {v}\n")
    return out.getvalue()


def same_labeled_graph(a: Graph, b: Graph) -> bool:
    """True when both graphs have the same labelled vertex and edge sets."""
    if a.n != b.n or a.m != b.m:
        return False
    if {a.label(v) for v in range(a.n)} != {b.label(v) for v in range(b.n)}:
        return False
    ea = {frozenset((a.label(u), a.label(v))) for u, v in a.edges()}
    eb = {frozenset((b.label(u), b.label(v))) for u, v in b.edges()}
    return ea == eb


@dataclass(frozen=True)
class NeighborhoodView:
    """The radius-``radius`` ball around ``center`` with hop distances."""

    center: int
    radius: int
    distance: Mapping[int, int] = field(repr=False)

    @property
    def members(self) -> frozenset[int]:
        return frozenset(self.distance)

    def __len__(self) -> int:
        return len(self.distance)

    def __contains__(self, v: object) -> bool:
        return v in self.distance


def neighborhood(g: Graph, v: int, delta: int) -> NeighborhoodView:
    """Vertices within ``delta`` hops of ``v`` (BFS truncated at depth delta)."""
    v = g.check_vertex(v)
    if delta < 0:
        raise ValueError("delta must be non-negative")
    dist = {v: 0}
    queue = deque([v])
    indptr, indices = g.indptr, g.indices
    while queue:
        x = queue.popleft()
        dx = dist[x]
        if dx == delta:
            continue
        for u in indices[indptr[x]:indptr[x + 1]].tolist():
            if u not in dist:
                dist[u] = dx + 1
                queue.append(u)
    return NeighborhoodView(center=v, radius=delta, distance=dist)


def induced_subgraph(g: Graph, members: Iterable[int]) -> tuple[Graph, dict[int, int]]:
    """Subgraph induced on ``members`` plus the old->new id map.

    New ids follow ascending old id.
    """
    keep = sorted({int(x) for x in members})
    if keep and (keep[0] < 0 or keep[-1] >= g.n):
        raise IndexError("member outside the vertex range")
    mapping = {old: new for new, old in enumerate(keep)}
    remap = np.full(g.n, -1, dtype=np.int64)
    remap[keep] = np.arange(len(keep), dtype=np.int64)
    e = g.edges()
    if e.size:
        a, b = remap[e[:, 0]], remap[e[:, 1]]
        sel = (a >= 0) & (b >= 0)
        sub_edges = np.stack([a[sel], b[sel]], axis=1)
    else:
        sub_edges = np.empty((0, 2), dtype=np.int64)
    labels = [g.label(v) for v in keep] if g.labels is not None else None
    return Graph.from_edges(len(keep), sub_edges, labels=labels), mapping


def connected_components(g: Graph) -> tuple[np.ndarray, int]:
    """Per-vertex component label (numbered by smallest member) and count."""
    label, count = _kernels.component_labels(g.indptr, g.indices)
    return label, int(count)


@dataclass(frozen=True)
class DiameterReport:
    diameter: int
    components: int
    largest_component_size: int
    component_diameters: tuple[int, ...]
    eccentricity: np.ndarray = field(repr=False, compare=False)
    component: np.ndarray = field(repr=False, compare=False)


def diameter(g: Graph) -> DiameterReport:
    """Exact diameter of the largest connected component.

    Runs a BFS from every vertex, so the per-component diameters (indexed
    by component label) and per-vertex eccentricities come for free.
    """
    if g.n == 0:
        raise ValueError("diameter of an empty graph is undefined")
    label, count = connected_components(g)
    ecc, _ = _kernels.all_source_bfs(g.indptr, g.indices, 0)
    comp_diam = np.zeros(count, dtype=np.int64)
    np.maximum.at(comp_diam, label, ecc)
    sizes = np.bincount(label, minlength=count)
    largest = int(np.argmax(sizes))  # ties -> component holding the smallest id
    return DiameterReport(
        diameter=int(comp_diam[largest]),
        components=count,
        largest_component_size=int(sizes[largest]),
        component_diameters=tuple(int(x) for x in comp_diam),
        eccentricity=ecc,
        component=label,
    )


@dataclass(frozen=True)
class NeighborhoodSizeStats:
    delta: int
    mean: float
    max: int
    variance: float
    mean_fraction: float
    variance_fraction: float


def neighborhood_size_stats(g: Graph, deltas: Sequence[int]) -> list[NeighborhoodSizeStats]:
    """Mean/max/variance of ``|N_delta(v)|`` over all vertices, per delta."""
    if not deltas:
        return []
    top = max(deltas)
    _, counts = _kernels.all_source_bfs(g.indptr, g.indices, top)
    out = []
    for d in deltas:
        col = counts[:, d].astype(np.float64)
        frac = col / g.n
        out.append(NeighborhoodSizeStats(
            delta=d, mean=float(col.mean()), max=int(col.max()),
            variance=float(col.var()), mean_fraction=float(frac.mean()),
            variance_fraction=float(frac.var()),
        ))
    return out
