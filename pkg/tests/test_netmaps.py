import numpy as np
import pytest
from hypothesis import given, strategies as st

from harnacklab import graph_core as gc
from harnacklab.errors import ParameterError
from harnacklab.netmaps import (discretize, dumbbell_report, nearest_net_map, rough_isometry_check,
                                transfer_inequality_experiment)
from harnacklab.potential import neumann_capacity


def test_path_net():
    g = gc.path_graph(9)
    disc = discretize(g, np.ones(9), 2)
    assert disc.net.tolist() == [0, 2, 4, 6, 8]
    # edges join net points at distance <= 3 eps
    assert disc.net_graph.num_edges == 4 + 3 + 2
    assert disc.partition["ok"] and disc.partition["c"] == pytest.approx(0.5)


@given(st.floats(1.0, 5.0))
def test_maps_preserve_constants(eps):
    g = gc.lattice2d(9)
    disc = discretize(g, np.ones(g.n), eps)
    assert np.allclose(disc.restrict(np.ones(g.n)), 1.0)
    assert np.allclose(disc.extend(np.ones(len(disc.net))), 1.0)
    assert disc.partition["ok"]


def test_small_eps_is_identity():
    g = gc.path_graph(5)
    disc = discretize(g, np.ones(5), 0.5)
    assert disc.trivial and disc.net.tolist() == list(range(5))
    with pytest.raises(ParameterError):
        discretize(g, np.ones(5), 0)


def test_rough_isometry_constants():
    g = gc.path_graph(9)
    m = np.ones(9)
    ident = rough_isometry_check(np.arange(9), g, m, g, m, 1.0)
    assert ident["C2"] == 1.0 and ident["C3"] == 1.0 and ident["ok"]
    disc = discretize(g, m, 2)
    rep = rough_isometry_check(nearest_net_map(disc), g, m, disc.net_graph, disc.net_measure, 2.0)
    assert rep["ok"] and rep["C2"] == pytest.approx(1.0) and rep["C3"] == pytest.approx(1.5)


def test_transfer_experiment_is_seeded():
    g = gc.lattice2d(9)
    a = transfer_inequality_experiment(g, np.ones(g.n), 2, g.root, 3, samples=10, seed=4)
    b = transfer_inequality_experiment(g, np.ones(g.n), 2, g.root, 3, samples=10, seed=4)
    assert a == b
    assert a["constant_energies"] == pytest.approx([0, 0, 0, 0], abs=1e-20)


def test_dumbbell_matches_direct_solves():
    g = gc.lattice2d(17)
    rep = dumbbell_report(g, g.root, 8)
    D = g.ball(g.root, 8)
    for key in ("sup_witness", "inf_witness"):
        x, y = rep[key]["x"], rep[key]["y"]
        direct = neumann_capacity(g, g.ball(x, 1), g.ball(y, 1), D)
        assert direct == pytest.approx(rep["sup" if key == "sup_witness" else "inf"], rel=1e-9)
    with pytest.raises(ParameterError):
        dumbbell_report(g, g.root, 4)
