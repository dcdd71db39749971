import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import complete_graph, path_graph, star_graph
from corescope.cores import core_decomposition
from corescope.estimators import (
    INDUCED,
    PROPAGATING,
    induced_all,
    induced_estimate,
    propagate_all,
    propagate_estimate,
    ratio_report,
    upper_bound_step,
)
from corescope.generators import gen_complete_ary_tree, gen_erdos_renyi, gen_tree_prime
from corescope.graph import Graph, diameter
from test_graph import graphs


def max_min_by_definition(deg, bounds):
    # literal max over i of min(b_i, deg - i + 1), bounds sorted ascending
    b = sorted(bounds)
    return max((min(b[i - 1], deg - i + 1) for i in range(1, deg + 1)), default=0)


@pytest.mark.parametrize("deg,bounds,want", [
    (4, [1, 3, 3, 5], 3),
    (5, [1, 1, 1, 1, 1], 1),
    (3, [3, 3, 3], 3),
    (0, [], 0),
])
def test_upper_bound_step_examples(deg, bounds, want):
    assert upper_bound_step(deg, bounds) == want


def test_upper_bound_step_rejects_bad_input():
    with pytest.raises(ValueError):
        upper_bound_step(3, [1, 2])
    with pytest.raises(ValueError):
        upper_bound_step(1, [-1])


@settings(max_examples=500)
@given(st.lists(st.integers(0, 30), max_size=25))
def test_upper_bound_step_matches_definition(bounds):
    assert upper_bound_step(len(bounds), bounds) == max_min_by_definition(len(bounds), bounds)


@settings(max_examples=300)
@given(st.lists(st.integers(0, 20), min_size=1, max_size=20), st.data())
def test_upper_bound_step_monotone(bounds, data):
    i = data.draw(st.integers(0, len(bounds) - 1))
    raised = list(bounds)
    raised[i] += data.draw(st.integers(1, 5))
    assert upper_bound_step(len(bounds), raised) >= upper_bound_step(len(bounds), bounds)


def test_propagate_examples():
    g = gen_erdos_renyi(50, 0.1, 1)
    assert all(propagate_estimate(g, v, 0) == g.degree(v) for v in range(g.n))
    assert propagate_estimate(star_graph(5), 0, 1) == 1
    k4 = propagate_all(complete_graph(4), 7)
    assert np.all(k4.values == 3)
    p4 = propagate_all(path_graph(4), 2)
    assert p4.column(2).tolist() == [1, 1, 1, 1]
    assert p4.column(0).tolist() == [1, 2, 2, 1]


def test_propagate_all_matches_local_on_gnp_200():
    g = gen_erdos_renyi(200, 0.05, 3)
    table = propagate_all(g, 3)
    for d in range(4):
        assert [propagate_estimate(g, v, d) for v in range(g.n)] == table.column(d).tolist()


@settings(max_examples=100, deadline=None)
@given(graphs(max_n=25), st.integers(0, 5))
def test_propagate_locality(g, delta):
    table = propagate_all(g, delta)
    for v in range(g.n):
        assert propagate_estimate(g, v, delta) == table.column(delta)[v]


@pytest.mark.parametrize("j", [2, 3, 4])
@pytest.mark.parametrize("levels", [3, 4, 5])
def test_tree_root_upper_estimate(j, levels):
    # the root keeps estimate j until the leaves' degree 1 arrives after
    # levels - 1 rounds; the core number is 1 throughout
    g, root = gen_complete_ary_tree(j, levels)
    col = propagate_all(g, levels + 1).values[root].tolist()
    assert col == [j] * (levels - 1) + [1] * 3
    assert [propagate_estimate(g, root, d) for d in range(levels + 2)] == col
    assert core_decomposition(g).core[root] == 1


def test_tree_root_at_depth_three_has_converged():
    g, root = gen_complete_ary_tree(2, 4)
    assert propagate_estimate(g, root, 2) == 2
    assert propagate_estimate(g, root, 3) == 1


def test_induced_examples():
    g = gen_erdos_renyi(40, 0.1, 2)
    assert all(induced_estimate(g, v, 0) == 0 for v in range(g.n))
    assert induced_estimate(complete_graph(4), 0, 1) == 3
    tp, root = gen_tree_prime(2, 3)
    assert induced_estimate(tp, root, 1) == 1
    assert core_decomposition(tp).core[root] == 2


@pytest.mark.parametrize("j", [2, 3, 4])
@pytest.mark.parametrize("levels", [3, 4, 5])
def test_tree_prime_root_lower_estimate(j, levels):
    g, root = gen_tree_prime(j, levels)
    chain = induced_all(g, levels + 1).values[root].tolist()
    assert chain[0] == 0
    assert chain[1:levels] == [1] * (levels - 1)
    assert chain[levels] == j  # the extra vertices are now inside the ball
    assert propagate_all(g, levels).values[root].tolist() == [j] * (levels + 1)


@settings(max_examples=100, deadline=None)
@given(graphs(max_n=25), st.integers(0, 5))
def test_induced_all_matches_per_vertex(g, delta):
    table = induced_all(g, delta)
    for v in range(g.n):
        assert induced_estimate(g, v, delta) == table.column(delta)[v]


@settings(max_examples=150, deadline=None)
@given(graphs(max_n=30))
def test_bound_chains(g):
    core = core_decomposition(g).core
    rep = diameter(g)
    top = max(rep.component_diameters)
    hat = propagate_all(g, top).values
    brv = induced_all(g, top).values
    assert np.array_equal(hat[:, 0], g.degrees)
    assert np.all(np.diff(hat, axis=1) <= 0)
    assert np.all(hat >= core[:, None])
    assert np.all(brv[:, 0] == 0)
    assert np.all(np.diff(brv, axis=1) >= 0)
    assert np.all(brv <= core[:, None])
    comp_diam = np.asarray(rep.component_diameters)[rep.component]
    assert np.array_equal(brv[np.arange(g.n), comp_diam], core)


def test_ratio_examples():
    k4 = complete_graph(4)
    rep = ratio_report(propagate_all(k4, 1), core_decomposition(k4))
    assert rep.optimal_fraction(1) == 1.0
    tree, root = gen_complete_ary_tree(2, 4)
    rep = ratio_report(propagate_all(tree, 2), core_decomposition(tree))
    assert rep.ratio(root, 2) == 2.0
    tp, root = gen_tree_prime(2, 3)
    rep = ratio_report(induced_all(tp, 1), core_decomposition(tp))
    assert rep.ratio(root, 1) == 0.5
    assert rep.kind == INDUCED


def test_ratio_zero_core_handling():
    g = Graph.from_edges(4, [(0, 1), (1, 2)])
    est = propagate_all(g, 2)
    with pytest.raises(ValueError, match="core number 0"):
        ratio_report(est, core_decomposition(g))
    rep = ratio_report(est, core_decomposition(g), exclude_zero_core=True)
    assert rep.excluded == 1
    assert rep.vertices.tolist() == [0, 1, 2]
    with pytest.raises(KeyError):
        rep.ratio(3, 1)


def test_ratio_histogram_counts_nonoptimal():
    g = gen_erdos_renyi(300, 4 / 299, 5)
    d = core_decomposition(g)
    rep = ratio_report(propagate_all(g, 3), d, exclude_zero_core=True, bins=5)
    assert rep.kind == PROPAGATING
    for s, col in zip(rep.summaries, rep.ratios.T):
        assert s.nonoptimal == int((col != 1).sum())
        assert sum(s.histogram) == s.nonoptimal
        assert 0.0 <= s.optimal_fraction <= 1.0
    assert np.all(rep.ratios >= 1.0)


def test_restrict_keeps_columns():
    g = gen_erdos_renyi(100, 0.05, 9)
    full = propagate_all(g, 4)
    sub = full.restrict([1, 3])
    assert np.array_equal(sub.column(3), full.column(3))
    assert sub.deltas == (1, 3)
