import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import complete_graph, path_graph
from corescope.errors import GraphParseError
from corescope.generators import gen_erdos_renyi, gen_tree_prime
from corescope.graph import (
    Graph,
    diameter,
    induced_subgraph,
    neighborhood,
    neighborhood_size_stats,
    parse_edge_list,
    same_labeled_graph,
    to_edge_list,
)


@st.composite
def graphs(draw, max_n=30):
    n = draw(st.integers(1, max_n))
    pairs = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=3 * n))
    return Graph.from_edges(n, pairs)


def test_parse_path():
    g, rep = parse_edge_list("a b\nb c")
    assert (g.n, g.m) == (3, 2)
    assert g.labels == ("a", "b", "c")
    assert g.neighbors(1).tolist() == [0, 2]
    assert rep.self_loops == 0


def test_parse_drops_loops_and_duplicates():
    g, rep = parse_edge_list("0 1\n1 0\n0 0")
    assert (g.n, g.m) == (2, 1)
    assert rep.self_loops == 1
    assert rep.duplicates == 1


def test_parse_comments_bytes_and_iterables():
    text = "# header\n% other\n\nx y\ny z\n"
    a, _ = parse_edge_list(text)
    b, _ = parse_edge_list(text.encode())
    c, _ = parse_edge_list(text.splitlines(keepends=True))
    assert a == b == c


def test_parse_malformed_line_reports_number():
    with pytest.raises(GraphParseError, match="line 3"):
        parse_edge_list("a b\nb c\na b c\n")


@pytest.mark.parametrize("text", ["", "# only a comment\n", "\n\n"])
def test_parse_empty_input(text):
    with pytest.raises(GraphParseError):
        parse_edge_list(text)


def test_serialize_is_canonical():
    g = Graph.from_edges(4, [(3, 1), (0, 2), (2, 1)])
    assert to_edge_list(g, use_labels=False) == "0 2\n1 2\n1 3\n"


@settings(max_examples=200, deadline=None)
@given(graphs())
def test_csr_invariants(g):
    assert g.degrees.sum() == 2 * g.m
    for v in range(g.n):
        nb = g.neighbors(v)
        assert np.all(np.diff(nb) > 0)
        assert v not in nb
        for u in nb.tolist():
            assert g.has_edge(u, v)


@settings(max_examples=200, deadline=None)
@given(graphs())
def test_round_trip(g):
    text = to_edge_list(g, use_labels=False)
    if not text:
        return
    once, _ = parse_edge_list(text)
    twice, _ = parse_edge_list(to_edge_list(once))
    # ids are re-dealt in first-appearance order, so compare by label
    assert same_labeled_graph(once, twice)
    # vertices without edges cannot survive an edge list
    assert once.n == int((g.degrees > 0).sum())
    assert once.m == g.m


def test_neighborhood_examples():
    g = path_graph(3)
    assert neighborhood(g, 1, 0).members == {1}
    view = neighborhood(g, 0, 2)
    assert dict(view.distance) == {0: 0, 1: 1, 2: 2}
    assert 2 in view and len(view) == 3


def test_neighborhood_rejects_bad_vertex():
    with pytest.raises(IndexError):
        neighborhood(path_graph(3), 3, 1)
    with pytest.raises(ValueError):
        neighborhood(path_graph(3), 0, -1)


@settings(max_examples=100, deadline=None)
@given(graphs(), st.data())
def test_neighborhoods_nest_and_reach_component(g, data):
    v = data.draw(st.integers(0, g.n - 1))
    rep = diameter(g)
    comp = set(np.flatnonzero(rep.component == rep.component[v]).tolist())
    prev = neighborhood(g, v, 0).members
    for d in range(1, int(rep.eccentricity[v]) + 2):
        cur = neighborhood(g, v, d).members
        assert prev <= cur
        prev = cur
    assert prev == comp
    assert neighborhood(g, v, int(rep.component_diameters[rep.component[v]])).members == comp


def test_induced_examples():
    tri, mapping = induced_subgraph(complete_graph(4), {0, 2, 3})
    assert (tri.n, tri.m) == (3, 3)
    assert mapping == {0: 0, 2: 1, 3: 2}
    pair, _ = induced_subgraph(path_graph(3), {0, 2})
    assert (pair.n, pair.m) == (2, 0)


def test_induced_on_tree_prime_root_ball():
    g, root = gen_tree_prime(2, 3)
    ball = neighborhood(g, root, 1).members
    sub, mapping = induced_subgraph(g, ball)
    assert (sub.n, sub.m) == (3, 2)
    assert sub.degree(mapping[root]) == 2


def test_induced_rejects_out_of_range():
    with pytest.raises(IndexError):
        induced_subgraph(path_graph(3), {0, 5})


@settings(max_examples=100, deadline=None)
@given(graphs())
def test_induced_on_everything_is_identity(g):
    sub, mapping = induced_subgraph(g, range(g.n))
    assert mapping == {v: v for v in range(g.n)}
    assert sub == g


def test_diameter_examples():
    assert diameter(path_graph(5)).diameter == 4
    assert diameter(complete_graph(4)).diameter == 1
    with pytest.raises(ValueError):
        diameter(Graph.from_edges(0, []))


def test_diameter_uses_largest_component():
    # a 6-path next to a triangle: the path wins
    g = Graph.from_edges(9, [(i, i + 1) for i in range(5)] + [(6, 7), (7, 8), (6, 8)])
    rep = diameter(g)
    assert rep.diameter == 5
    assert rep.components == 2
    assert rep.largest_component_size == 6
    assert rep.component_diameters == (5, 1)


def test_neighborhood_stats_match_direct_bfs():
    g = gen_erdos_renyi(300, 3 / 299, 11)
    stats = neighborhood_size_stats(g, [1, 2, 3])
    for s in stats:
        sizes = np.array([len(neighborhood(g, v, s.delta)) for v in range(g.n)])
        assert s.mean == pytest.approx(sizes.mean())
        assert s.max == sizes.max()
        assert s.variance == pytest.approx(sizes.var())
        assert s.mean_fraction == pytest.approx(sizes.mean() / g.n)
    assert stats[0].mean == pytest.approx(1 + 2 * g.m / g.n)
