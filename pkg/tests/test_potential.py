import numpy as np
import pytest
from hypothesis import given, strategies as st

from corpus import graph_strategy, random_domain
from harnacklab import graph_core as gc
from harnacklab.dirichlet import DomainProblem
from harnacklab.errors import ContainmentError, ConstructionError, OverlapError, ParameterError
from harnacklab.potential import (cap_green_duality_report, capacity, enhanced_subadditivity_check, fit_loglog,
                                  green_radial, neumann_capacity)
from harnacklab.sampling import make_rng


def test_capacity_of_path_interval():
    # unit resistors in series: the centre of P9 sees two chains of length 4
    g = gc.path_graph(9)
    assert np.isclose(capacity(g, [4], np.arange(1, 8)).value, 2 / 4)


@given(graph_strategy(), st.integers(0, 1000))
def test_capacity_properties(g, seed):
    rng = make_rng(seed)
    x, D = random_domain(g, rng)
    res = capacity(g, [x], D)
    assert np.isclose(res.value, res.nu.sum(), rtol=1e-10)
    assert res.h.min() >= -1e-12 and res.h.max() <= 1 + 1e-12
    assert np.all(res.h[np.setdiff1d(np.arange(g.n), D)] == 0)
    # monotone in the set, antitone in the domain
    A2 = np.intersect1d(g.ball(x, 1.0, closed=True), D)
    assert capacity(g, A2, D).value >= res.value * (1 - 1e-12)
    bigger = np.union1d(D, g.boundary(D))
    if len(g.boundary(bigger)):
        assert capacity(g, [x], bigger).value <= res.value * (1 + 1e-12)


@given(st.integers(3, 40))
def test_neumann_capacity_of_path(n):
    g = gc.path_graph(n)
    assert np.isclose(neumann_capacity(g, [0], [n - 1], np.arange(n)), 1 / (n - 1))


def test_neumann_capacity_errors():
    g = gc.path_graph(5)
    with pytest.raises(OverlapError):
        neumann_capacity(g, [1, 2], [2], np.arange(5))
    with pytest.raises(ContainmentError):
        neumann_capacity(g, [1], [4], np.arange(4))
    with pytest.raises(ContainmentError):
        capacity(g, [4], np.arange(4))


def test_duality_bracket_on_lattice():
    g = gc.lattice2d(17)
    rep = cap_green_duality_report(g, g.root, 2, g.ball(g.root, 8))
    assert rep["lhs"] <= rep["mid"] and rep["C_G_observed"] >= 1


def test_singleton_band_is_the_pole():
    g = gc.path_graph(9)
    dp = DomainProblem(g, np.arange(1, 8))
    assert np.isclose(green_radial(dp, 4, 0.0), dp.green(4, 4))


def test_subadditivity_rejects_overlap_and_no_gain():
    g = gc.path_graph(21)
    D = np.arange(1, 20)
    with pytest.raises(OverlapError):
        enhanced_subadditivity_check(g, D, [[9, 10], [10, 11]], [9, 11])
    with pytest.raises(ParameterError):
        enhanced_subadditivity_check(g, D, [[9]], [9])
    # two far apart points in a path barely interact but the gain stays positive
    rep = enhanced_subadditivity_check(g, D, [[3], [17]], [3, 17])
    assert 0 < rep["delta"] < 0.2


def test_fit_loglog_recovers_power():
    x = np.array([1.0, 2.0, 4.0, 8.0])
    fit = fit_loglog(x, 3 * x ** 1.5)
    assert np.isclose(fit["slope"], 1.5) and fit["residual"] < 1e-12
