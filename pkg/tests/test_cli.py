import json

import pytest

from harnacklab import cli
from harnacklab.errors import ConstructionError


def run(tmp_path, *argv):
    out = tmp_path / "out"
    code = cli.main(list(argv) + ["--out", str(out)])
    return code, out


def test_capacity_example(tmp_path):
    code, out = run(tmp_path, "capacity", "--generate", "path:9", "--A", "v4", "--D", "v1..v7")
    assert code == 0
    rep = json.loads((out / "capacity.json").read_text())
    assert rep["capacity"] == pytest.approx(0.5)
    assert rep["hitting_probability_gap"] <= 1e-12


def test_harnack_csv(tmp_path):
    code, out = run(tmp_path, "harnack", "--generate", "lattice2d:9", "--radii", "1,2")
    assert code == 0
    lines = (out / "harnack.csv").read_text().splitlines()
    assert len(lines) == 3


def test_precondition_exit_code(tmp_path):
    code, out = run(tmp_path, "capacity", "--generate", "path:9", "--A", "v8", "--D", "v1..v7")
    assert code == 1
    err = json.loads((out / "error.json").read_text())
    assert err["error"] == "ContainmentError" and err["exit_code"] == 1


def test_construction_exit_code(tmp_path, monkeypatch):
    def boom(g, cfg, out):
        raise ConstructionError("forced", {"where": "test"})

    monkeypatch.setitem(cli.HANDLERS, "green", boom)
    code, out = run(tmp_path, "green", "--generate", "path:9", "--D", "v1..v7")
    assert code == 2
    assert json.loads((out / "error.json").read_text())["witness"] == {"where": "test"}


@pytest.mark.parametrize("argv", [[], ["nosuch"], ["perturb", "--generate", "path:9"],
                                  ["net", "--generate", "path:9"], ["harnack", "--bogus", "1"]])
def test_usage_errors(argv):
    assert cli.main(argv) == 64


def test_config_round_trip(tmp_path):
    code, out = run(tmp_path, "perturb", "--generate", "lattice2d:9", "--seed", "3", "--trials", "1",
                    "--radii", "1")
    assert code == 0
    text = (out / "config.txt").read_text()
    cfg = cli.RunConfig.from_text(text)
    assert cfg.to_text() == text and cfg.seed == "3" and cfg.options["trials"] == "1"
    first = (out / "perturb.json").read_bytes()
    assert cli.main(["perturb", "--config", str(out / "config.txt")]) == 0
    assert (out / "perturb.json").read_bytes() == first


def test_graph_file_input(tmp_path):
    code, out = run(tmp_path, "generate", "--generate", "lattice2d:5")
    assert code == 0
    graph = next(out.glob("*.g"))
    code2 = cli.main(["harnack", "--graph", str(graph), "--radii", "1", "--out", str(tmp_path / "h")])
    assert code2 == 0
    a = (tmp_path / "h" / "harnack.csv").read_text()
    assert cli.main(["harnack", "--generate", "lattice2d:5", "--radii", "1", "--out", str(tmp_path / "k")]) == 0
    assert a == (tmp_path / "k" / "harnack.csv").read_text()


def test_missing_graph_file(tmp_path):
    code, _ = run(tmp_path, "harnack", "--graph", str(tmp_path / "none.g"))
    assert code == 1
