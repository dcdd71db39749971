import os
from pathlib import Path

import numpy as np
import pytest

from corescope.generators import gen_erdos_renyi
from corescope.graph import Graph

WPG_ENV = "CORESCOPE_WPG"
WPG_DEFAULT = Path(__file__).resolve().parents[1] / "data" / "wpg.txt"

# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def wpg_path() -> Path:
    """US power-grid edge list (4941 vertices).

    Not shipped with the package.  Point CORESCOPE_WPG at a copy or place
    it at data/wpg.txt; without it the dependent criteria fail.
    """
    return Path(os.environ.get(WPG_ENV, WPG_DEFAULT))


def path_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def complete_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def star_graph(leaves: int) -> Graph:
    return Graph.from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def random_suite(count: int = 500, seed: int = 2024):
    """ER graphs with n <= 1000 and p cycling through 2/n, 5/n, 20/n."""
    rng = np.random.default_rng(seed)
    for i in range(count):
        n = int(rng.integers(2, 1001))
        c = (2, 5, 20)[i % 3]
        yield gen_erdos_renyi(n, min(1.0, c / n), 10_000 + i)


@pytest.fixture(scope="session")
def suite_graphs() -> list[Graph]:
    return list(random_suite())


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
