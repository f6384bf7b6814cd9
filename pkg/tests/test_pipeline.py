import math

import pytest

from harnacklab import graph_core as gc
from harnacklab.pipeline import characterization_pipeline


@pytest.fixture(scope="module")
def dossier():
    return characterization_pipeline(gc.path_graph(65))


def test_stages_present(dossier):
    assert set(dossier["stages"]) >= {"ehi", "measure", "scale", "chain_metric", "inequalities", "cap_psi"}
    assert dossier["flags"] == []


def test_presentations_comparable(dossier):
    for cell in dossier["stages"]["inequalities"]:
        assert cell["pi_comparable"]
        assert math.isfinite(cell["pi"]["C"]) and math.isfinite(cell["pi_chain"]["C"])


def test_branching_tree_is_flagged():
    d = characterization_pipeline(gc.spherically_symmetric_tree([2, 3, 4, 5], 6), radii=(1, 2))
    assert "ehi_profile_not_flat" in d["flags"]
    assert d["stages"]["ehi"]["growth"] > 2.0
