import numpy as np
import pytest
from hypothesis import given, strategies as st

from corpus import graph_strategy, random_domain
from harnacklab import graph_core as gc
from harnacklab.dirichlet import (DomainProblem, energy, gamma_measure, lambda_min, solve_dirichlet)
from harnacklab.errors import ParameterError, TopologyError
from harnacklab.sampling import make_rng


@given(graph_strategy(), st.integers(0, 1000))
def test_green_symmetric_positive(g, seed):
    _, D = random_domain(g, make_rng(seed))
    G = DomainProblem(g, D).green_matrix
    assert np.allclose(G, G.T, atol=1e-12)
    assert np.all(G > 0)


@given(graph_strategy(), st.integers(0, 1000))
def test_harmonic_measure_is_a_distribution(g, seed):
    _, D = random_domain(g, make_rng(seed))
    K = DomainProblem(g, D).harmonic_measure_matrix
    assert np.all(K >= -1e-14)
    assert np.allclose(K.sum(axis=1), 1.0, atol=1e-12)


@given(graph_strategy(), st.integers(0, 1000))
def test_maximum_principle(g, seed):
    rng = make_rng(seed)
    _, D = random_domain(g, rng)
    dp = DomainProblem(g, D)
    data = rng.normal(size=len(dp.boundary))
    h = solve_dirichlet(dp, data)
    assert h[D].max() <= data.max() + 1e-12 and h[D].min() >= data.min() - 1e-12


@given(graph_strategy(), st.integers(0, 1000))
def test_energy_density_sums_to_energy(g, seed):
    f = make_rng(seed).normal(size=g.n)
    assert np.isclose(gamma_measure(g, f).sum(), energy(g, f), rtol=1e-12)
    assert np.isclose(energy(g, f), f @ (g.laplacian @ f), rtol=1e-12)
    assert np.isclose(energy(g, f + 3.0), energy(g, f), rtol=1e-10)


def test_lambda_min_of_path_interval():
    g = gc.path_graph(7)
    dp = DomainProblem(g, np.arange(1, 6))
    assert np.isclose(lambda_min(dp, np.ones(7)), 2 - 2 * np.cos(np.pi / 6))


def test_domain_errors():
    g = gc.path_graph(5)
    with pytest.raises(ParameterError):
        DomainProblem(g, [])
    with pytest.raises(TopologyError):
        DomainProblem(g, np.arange(5))
