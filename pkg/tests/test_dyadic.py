import numpy as np
import pytest

from harnacklab import graph_core as gc
from harnacklab.dyadic import (build_ball_measure, build_cube_hierarchy, check_hierarchy, cube_capacities,
                               extend_density, rvd_report, verify_capacity_good)


@pytest.fixture(scope="module")
def lattice():
    return gc.lattice2d(33)


def test_hierarchy_is_nested_partition(lattice):
    h = build_cube_hierarchy(lattice, lattice.root, 8)
    assert check_hierarchy(h)["ok"]
    caps = cube_capacities(h)
    assert caps.C1 >= 1


def test_measure_frozen_constants(lattice):
    gm = build_ball_measure(lattice, np.ones(lattice.n), lattice.root, 8, max_centers=30)
    c = gm.constants
    assert c["C1"] == pytest.approx(1.0) and c["C_M"] == 145 and c["delta"] == 0.0 and c["depth"] == 1
    assert gm.density[lattice.root] == 1.0
    assert np.all(gm.density[gm.hierarchy.ball] > 0)
    assert np.all(gm.density[np.setdiff1d(np.arange(lattice.n), gm.hierarchy.ball)] == 0)


def test_counting_measure_is_capacity_good_on_path():
    g = gc.path_graph(65)
    rep = verify_capacity_good(g, np.ones(g.n), np.ones(g.n), g.root, 16, max_centers=20)
    assert rep["capacity_good"] and rep["beta1"] > 0


def test_extension_copies_nearest_value():
    g = gc.path_graph(7)
    dens = np.array([0, 0, 2.0, 3.0, 5.0, 0, 0])
    out = extend_density(g, dens, np.array([2, 3, 4]))
    assert out.tolist() == [2.0, 2.0, 2.0, 3.0, 5.0, 5.0, 5.0]


def test_reverse_doubling_exponent_on_lattice(lattice):
    rep = rvd_report(lattice, np.ones(lattice.n), [lattice.root], [1, 2, 4, 8])
    assert 1.5 <= rep["alpha"] <= 2.5
