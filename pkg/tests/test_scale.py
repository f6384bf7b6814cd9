import numpy as np
import pytest
from hypothesis import given, strategies as st

from harnacklab import graph_core as gc
from harnacklab.errors import ParameterError
from harnacklab.scale import (annuli_comparison, build_chain_metric, chain_metric_checks, psi_cell,
                              quasi_metric, quasi_triangle_constant, quasisymmetry_distortion, scale_function)


@pytest.fixture(scope="module")
def lattice_psi():
    g = gc.lattice2d(9)
    return g, scale_function(g, np.ones(g.n), np.arange(g.n), [1, 2, 4, 8])


def test_table_matches_cells(lattice_psi):
    g, sf = lattice_psi
    for x in (0, g.root, 7):
        for r in (1.0, 2.0, 4.0):
            val, _ = psi_cell(g, np.ones(g.n), x, r)
            assert np.isclose(sf(x, r)[0], val)


@given(st.integers(0, 80), st.floats(1.0, 8.0))
def test_interpolation_is_monotone_in_radius(x, r):
    g = gc.lattice2d(9)
    sf = _cached(g)
    assert sf(x, r * 1.1)[0] >= sf(x, r)[0] * (1 - 1e-12)


_SF = {}


def _cached(g):
    if "sf" not in _SF:
        _SF["sf"] = scale_function(g, np.ones(g.n), np.arange(g.n), [1, 2, 4, 8])
    return _SF["sf"]


def test_quasi_metric_symmetric(lattice_psi):
    g, sf = lattice_psi
    D = quasi_metric(g, sf)
    assert np.allclose(D, D.T) and np.all(np.diag(D) == 0)
    K, exact = quasi_triangle_constant(D)
    assert exact and K >= 1


def test_chain_metric_on_lattice(lattice_psi):
    g, sf = lattice_psi
    cm = build_chain_metric(g, sf)
    chk = chain_metric_checks(cm)
    assert chk["metric"] and chk["lower_bound"] and chk["upper_bound"]
    assert cm.beta >= 1


def test_power_scale_gives_power_metric():
    g = gc.path_graph(12)
    cm = build_chain_metric(g, lambda x, r: np.asarray(r, dtype=float) ** 2)
    assert cm.beta == 2.0
    # D^eps = sqrt(2) d(x, y), already a metric on the path
    assert np.allclose(cm.d_psi, np.sqrt(2) * g.distance_matrix)


def test_identity_distortion_is_trivial():
    g = gc.lattice2d(5)
    d = g.distance_matrix
    rep = annuli_comparison(d, d, g.root, 1, 2)
    assert rep["eta_needed"] == pytest.approx(1.0) and rep["inner_ok"]
    env = quasisymmetry_distortion(d, 3 * d)
    assert env["exhaustive"] and env["C"] == pytest.approx(1.0)
    assert env["gamma1"] == pytest.approx(1.0) and env["gamma2"] == pytest.approx(1.0)


def test_bad_radii_rejected():
    g = gc.path_graph(5)
    with pytest.raises(ParameterError):
        scale_function(g, np.ones(5), [0], [0, 1])
