import numpy as np
import pytest
from hypothesis import given, strategies as st

from corpus import graph_strategy
from harnacklab import graph_core as gc
from harnacklab.errors import ParameterError


def test_generator_sizes():
    assert gc.path_graph(9).n == 9 and gc.path_graph(9).num_edges == 8
    assert gc.cycle_graph(7).num_edges == 7
    lat = gc.lattice2d(5)
    assert lat.n == 25 and lat.num_edges == 40 and lat.root == 12
    for level in range(4):
        assert gc.sierpinski_gasket_graph(level).n == 3 * (3 ** level + 1) // 2
    tree = gc.spherically_symmetric_tree([2, 3, 4, 5], 6)
    assert gc.tree_level_sizes(tree) == [1, 2, 6, 24, 120, 120, 120]


def test_from_spec_aliases():
    assert gc.from_spec("grid:5").n == 25
    assert gc.from_spec("sst:2,3;depth=4").n == 1 + 2 + 6 + 6 + 6
    assert gc.from_spec("join:gasket:1+lattice2d:3").n == 6 + 9 - 1
    star = gc.from_spec("star:1,2,3")
    assert star.n == 4 and sorted(star.weights.tolist()) == [1.0, 2.0, 3.0]
    with pytest.raises(ParameterError):
        gc.from_spec("nosuch:3")
    with pytest.raises(ParameterError):
        gc.from_spec("path:x")


@given(graph_strategy())
def test_file_round_trip(g):
    h = gc.parse_graph(gc.format_graph(g))
    assert h.n == g.n and h.root == g.root
    assert np.array_equal(h.edges, g.edges)
    assert np.array_equal(h.weights, g.weights) and np.array_equal(h.lengths, g.lengths)


def test_parse_errors_name_the_line():
    with pytest.raises(ParameterError, match="line 2"):
        gc.parse_graph("e a b 1\ne b c oops\n")
    with pytest.raises(ParameterError, match="line 1"):
        gc.parse_graph("x a b\n")
    with pytest.raises(ParameterError, match="root"):
        gc.parse_graph("# root z\ne a b\n")


@given(graph_strategy(20))
def test_distance_matrix_is_a_metric(g):
    assert gc.check_metric_axioms(g.distance_matrix)["ok"]


def test_balls_open_and_closed():
    p = gc.path_graph(9)
    assert p.ball(4, 2).tolist() == [3, 4, 5]
    assert p.ball(4, 2, closed=True).tolist() == [2, 3, 4, 5, 6]
    assert p.boundary([3, 4, 5]).tolist() == [2, 6]


def test_subdivision_scales_lengths():
    g = gc.lattice2d(3)
    c = gc.subdivide_edges(g, 4)
    assert c.n == g.n + 3 * g.num_edges
    assert np.allclose(c.distance_matrix[:g.n, :g.n], g.distance_matrix)


@given(graph_strategy(25), st.floats(0.5, 6.0))
def test_epsilon_net_separated_and_covering(g, eps):
    net = gc.epsilon_net(g, eps)
    chk = gc.check_net(g, net, eps)
    assert chk["separated"] and chk["covering"]
    assert net[0] == g.root


def test_doubling_report_runs_on_lattice():
    rep = gc.metric_doubling_report(gc.lattice2d(9), [1, 2])
    assert rep
