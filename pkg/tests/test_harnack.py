import numpy as np
import pytest
from hypothesis import given, strategies as st

from harnacklab import graph_core as gc
from harnacklab.errors import ParameterError, TopologyError
from harnacklab.harnack import (ehi_profile, harnack_constant, harnack_constant_sets, perturb_weights,
                                perturbation_experiment, random_data_ratio)


def test_lattice_cell_has_witness():
    g = gc.lattice2d(9)
    rep = harnack_constant(g, g.root, 2, 2)
    assert rep.C_H > 1 and rep.inner_size == 13
    assert rep.b in g.boundary(g.ball(g.root, 4)).tolist()


@given(st.floats(0.1, 50.0))
def test_invariant_under_weight_scaling(c):
    g = gc.lattice2d(9)
    a = harnack_constant(g, g.root, 1, 2).C_H
    b = harnack_constant(g.scaled(c), g.root, 1, 2).C_H
    assert np.isclose(a, b, rtol=1e-10)


@given(st.integers(0, 10**6))
def test_point_masses_dominate_random_data(seed):
    g = gc.sierpinski_gasket_graph(3)
    assert random_data_ratio(g, 0, 1, 2, 50, seed) <= harnack_constant(g, 0, 1, 2).C_H * (1 + 1e-9)


@given(st.floats(1.0, 4.0), st.integers(0, 10**6))
def test_perturbation_stays_in_band(C, seed):
    g = gc.lattice2d(5)
    ratio = perturb_weights(g, C, seed).weights / g.weights
    assert np.all(ratio >= 1 / C * (1 - 1e-12)) and np.all(ratio <= C * (1 + 1e-12))


def test_trivial_perturbation_has_no_inflation():
    g = gc.lattice2d(9)
    res = perturbation_experiment(g, 1.0, 2, 0, radii=[1, 2])
    assert res["max_inflation"] == 1.0


def test_profile_flags_whole_graph_cells():
    g = gc.path_graph(9)
    prof = ehi_profile(g, [4], [1, 4], 2)
    assert prof["skipped"] == 1 and prof["rows"][1]["C_H"] is None
    with pytest.raises(TopologyError):
        harnack_constant(g, 4, 4, 2)
    with pytest.raises(ParameterError):
        harnack_constant(g, 4, 1, 1)


def test_cable_column_matches_subdivision():
    prof = ehi_profile(gc.path_graph(9), [4], [1], 2, cable_k=2)
    direct = harnack_constant(gc.subdivide_edges(gc.path_graph(9), 2), 4, 1, 2).C_H
    assert np.isclose(prof["rows"][0]["C_H_cable"], direct)


def test_inner_set_reaching_the_boundary_is_unbounded():
    # a harmonic function may vanish at boundary vertex 0 yet be positive at 2
    rep = harnack_constant_sets(gc.path_graph(5), [0, 2], [1, 2, 3])
    assert np.isinf(rep.C_H) and rep.b == 4
