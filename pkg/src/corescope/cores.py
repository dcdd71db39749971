"""Core decomposition, degeneracy and shell distributions."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import OracleRefusal
from .graph import Graph

log = logging.getLogger(__name__)

NAIVE_ORACLE_LIMIT = 10_000


@dataclass(frozen=True)
class ShellDistribution:
    """Vertex counts ``c_1..c_D`` per shell (core number), ``c_D >= 1``."""

    counts: tuple[int, ...]

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        object.__setattr__(self, "counts", counts)
        if not counts:
            raise ValueError("shell distribution needs at least one shell")
        if any(c < 0 for c in counts):
            raise ValueError("shell counts must be non-negative")
        if counts[-1] < 1:
            raise ValueError("the deepest shell c_D must be non-empty")

    @property
    def degeneracy(self) -> int:
        return len(self.counts)

    def count(self, i: int) -> int:
        """``c_i`` for ``1 <= i <= D``."""
        return self.counts[i - 1]

    @property
    def total(self) -> int:
        return sum(self.counts)

    def infeasible_shell(self) -> int | None:
        """First shell ``i`` (deepest first) with ``c_i > 0`` but fewer than
        ``i + 1`` vertices in shells ``>= i``; ``None`` if feasible."""
        deeper = 0
        for i in range(self.degeneracy, 0, -1):
            deeper += self.count(i)
            if self.count(i) > 0 and deeper < i + 1:
                return i
        return None

    def is_feasible(self) -> bool:
        return self.infeasible_shell() is None


@dataclass(frozen=True)
class CoreDecomposition:
    core: np.ndarray = field(repr=False)
    degeneracy: int
    shell_sizes: tuple[int, ...]
    isolated: int
    order: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CoreDecomposition):
            return NotImplemented
        return (np.array_equal(self.core, other.core)
                and self.degeneracy == other.degeneracy
                and self.shell_sizes == other.shell_sizes
                and self.isolated == other.isolated)

    __hash__ = None

    @classmethod
    def from_core(cls, core, order=None) -> "CoreDecomposition":
        core = np.asarray(core, dtype=np.int64)
        core.flags.writeable = False
        D = int(core.max()) if core.size else 0
        counts = np.bincount(core, minlength=D + 1) if core.size else np.zeros(1, np.int64)
        return cls(core=core, degeneracy=D,
                   shell_sizes=tuple(int(c) for c in counts[1:]),
                   isolated=int(counts[0]), order=order)


def core_decomposition(g: Graph) -> CoreDecomposition:
    """Core number of every vertex in O(n + m) by bucketed peeling.

    Isolated vertices get core number 0; ``isolated`` counts them.
    """
    core, order = _kernels.core_numbers(g.indptr, g.indices)
    result = CoreDecomposition.from_core(core, order)
    if result.isolated:
        log.debug("%d isolated vertices assigned core number 0", result.isolated)
    return result


def naive_core_oracle(g: Graph) -> CoreDecomposition:
    """Slow reference decomposition used to check :func:`core_decomposition`.

    Literal peeling: for ``i = 0, 1, ...`` keep sweeping over the surviving
    vertices, deleting any with current degree ``<= i``, until a sweep
    deletes nothing.  No buckets, no ordering tricks.
    """
    if g.n > NAIVE_ORACLE_LIMIT:
        raise OracleRefusal(f"naive oracle limited to n <= {NAIVE_ORACLE_LIMIT}, got {g.n}")
    adj = [set(g.neighbors(v).tolist()) for v in range(g.n)]
    alive = set(range(g.n))
    core = [0] * g.n
    i = 0
    while alive:
        removed = True
        while removed:
            removed = False
            for v in sorted(alive):
                if len(adj[v]) <= i:
                    core[v] = i
                    alive.discard(v)
                    for u in adj[v]:
                        adj[u].discard(v)
                    adj[v] = set()
                    removed = True
        i += 1
    return CoreDecomposition.from_core(core)


def shell_distribution(d: CoreDecomposition) -> ShellDistribution:
    """Counts ``c_1..c_D``; vertices with core 0 stay in ``d.isolated``."""
    if d.degeneracy < 1:
        raise ValueError("graph has no non-empty 1-core")
    return ShellDistribution(d.shell_sizes)


def k_core(d: CoreDecomposition, k: int) -> np.ndarray:
    """Vertex ids of the k-core."""
    return np.flatnonzero(d.core >= k)
