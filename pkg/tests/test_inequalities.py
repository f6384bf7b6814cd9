import numpy as np
import pytest
from hypothesis import given, strategies as st

from harnacklab import graph_core as gc
from harnacklab.errors import ParameterError, TopologyError
from harnacklab.inequalities import (annulus_energy_form, build_cutoff, cap_psi_report, check_cutoff, cs_margin,
                                     cs_psd_holds, cs_verify, cs_witness_value, energy_of_max_check,
                                     linear_cutoff, pi_constant, pi_constant_sets, pi_rayleigh)
from harnacklab.potential import capacity
from harnacklab.dirichlet import energy, gamma_measure
from harnacklab.sampling import make_rng
from harnacklab.scale import scale_function


def test_cycle_spectrum():
    # whole-graph PI on C4 with unit mass: 1 / (smallest nonzero Laplacian eigenvalue) = 1/2
    g = gc.cycle_graph(4)
    rep = pi_constant_sets(g, np.arange(4), np.arange(4), np.ones(4), 1.0)
    assert rep.C == pytest.approx(0.5, abs=1e-12)
    assert pi_rayleigh(g, np.arange(4), np.arange(4), np.ones(4), rep.witness) == pytest.approx(0.5)


@given(st.integers(0, 10**6))
def test_rayleigh_quotients_below_best_constant(seed):
    g = gc.lattice2d(9)
    inner, outer = g.ball(g.root, 2), g.ball(g.root, 4)
    rep = pi_constant_sets(g, inner, outer, np.ones(g.n), 1.0)
    f = make_rng(seed).normal(size=g.n)
    assert pi_rayleigh(g, inner, outer, np.ones(g.n), f) <= rep.C * (1 + 1e-10)


def test_disconnected_outer_set():
    g = gc.path_graph(9)
    outer = [0, 1, 2, 3, 5, 6, 7]
    assert np.isinf(pi_constant_sets(g, [1, 2, 6], outer, np.ones(9), 1.0).C)
    # a component that misses the inner set drops out
    a = pi_constant_sets(g, [1, 2], outer, np.ones(9), 1.0).C
    assert a == pytest.approx(pi_constant_sets(g, [1, 2], [0, 1, 2, 3], np.ones(9), 1.0).C)


def test_pi_scales_inversely_with_psi():
    g = gc.lattice2d(9)
    a = pi_constant(g, g.root, 2, 2, np.ones(g.n), 1.0).C
    b = pi_constant(g, g.root, 2, 2, np.ones(g.n), 4.0).C
    assert b == pytest.approx(a / 4)


def test_linear_cutoff_on_path():
    g = gc.path_graph(9)
    phi = build_cutoff(g, 4, 1, 3)
    assert phi.values.tolist() == [0, 0, 0.5, 1, 1, 1, 0.5, 0, 0]
    assert check_cutoff(phi.values, phi.inner, phi.outer)["ok"]
    with pytest.raises(ParameterError):
        linear_cutoff(np.zeros(3), 2, 2)


def test_equilibrium_cutoff_energy_is_capacity():
    g = gc.path_graph(9)
    phi = build_cutoff(g, 4, 1, 3, kind="equilibrium")
    assert energy(g, phi.values) == pytest.approx(capacity(g, phi.inner, phi.outer).value)


def test_cutoff_on_whole_graph():
    g = gc.path_graph(5)
    with pytest.raises(TopologyError):
        build_cutoff(g, 2, 1, 10)
    assert build_cutoff(g, 2, 9, 10).values.tolist() == [1.0] * 5


@given(st.integers(0, 10**6))
def test_schur_form_is_minimal_energy(seed):
    g = gc.lattice2d(7)
    U = np.setdiff1d(g.ball(g.root, 3), g.ball(g.root, 1))
    S = annulus_energy_form(g, U)
    rng = make_rng(seed)
    f = rng.normal(size=g.n)
    assert f[U] @ S @ f[U] <= gamma_measure(g, f)[U].sum() * (1 + 1e-12) + 1e-12


@pytest.fixture(scope="module")
def cs_cell():
    g = gc.lattice2d(17)
    phi = build_cutoff(g, g.root, 3, 6)
    return g, cs_verify(g, g.root, 3, 2, np.ones(g.n), 9.0, phi, 0.125)


def test_cs_constant_is_sharp(cs_cell):
    _, rep = cs_cell
    assert rep.C2 > 0
    assert cs_psd_holds(rep, rep.C2) and not cs_psd_holds(rep, 0.999 * rep.C2)
    assert cs_witness_value(rep) == pytest.approx(rep.C2, rel=1e-8)
    assert cs_margin(rep, 1.01 * rep.C2) > 0


def test_cs_decreases_with_gradient_factor():
    g = gc.lattice2d(17)
    phi = build_cutoff(g, g.root, 3, 6)
    vals = [cs_verify(g, g.root, 3, 2, np.ones(g.n), 9.0, phi, c).C2 for c in (0.0, 0.125, 1.0, 100.0)]
    assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))


@given(st.integers(0, 10**6))
def test_energy_of_max(seed):
    g = gc.sierpinski_gasket_graph(3)
    rng = make_rng(seed)
    rep = energy_of_max_check(g, rng.normal(size=g.n), rng.random(g.n), rng.random(g.n))
    assert rep["margin"] >= -1e-12


def test_cap_psi_constant_is_one_for_its_own_scale():
    g = gc.lattice2d(17)
    sf = scale_function(g, np.ones(g.n), [g.root], [2, 4, 8], inner_factor=8)
    rep = cap_psi_report(g, np.ones(g.n), sf, [(g.root, 2), (g.root, 4), (g.root, 8)], 1 / 8)
    assert rep["C"] == pytest.approx(1.0)
    with pytest.raises(ParameterError):
        cap_psi_report(g, np.ones(g.n), sf, [(g.root, 2)], 1.5)
