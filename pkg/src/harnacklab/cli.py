"""Command-line entry point: ``harnacklab <command> [options]``.

Exit codes: 0 success, 1 precondition error, 2 construction or assertion
error (the witness is written to ``error.json``), 64 usage error.  Every
run writes ``config.txt`` (``key=value`` lines) next to its reports; the
same file can be passed back with ``--config``.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .dirichlet import DomainProblem, check_measure
from .dyadic import build_ball_measure, extend_density
from .errors import ConstructionError, HarnackLabError, ParameterError, PreconditionError
from .graph_core import WeightedGraph, from_spec, read_graph, tree_level_sizes, write_graph
from .harnack import ehi_profile, perturbation_experiment
from .inequalities import build_cutoff, cap_psi_report, cs_verify, pi_constant
from .netmaps import discretize, dumbbell_report, nearest_net_map, rough_isometry_check, \
    transfer_inequality_experiment
from .pipeline import characterization_pipeline
from .potential import capacity, hitting_probability
from .report import write_csv, write_json
from .scale import build_chain_metric, chain_metric_checks, scale_function

EXIT_OK, EXIT_PRECONDITION, EXIT_CONSTRUCTION, EXIT_USAGE = 0, 1, 2, 64
COMMANDS = ("generate", "green", "capacity", "harnack", "measure", "scale", "inequalities",
            "pipeline", "net", "dumbbell", "perturb")
RANDOMIZED = ("net", "perturb")


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# run configuration
# ---------------------------------------------------------------------------

@dataclass
class RunConfig:
    """Everything that determines a run; serialized as sorted ``key=value`` lines.

    Values are kept as the strings given on the command line so that the
    file round-trips exactly.
    """

    command: str
    graph: str = ""
    generate: str = ""
    measure: str = "counting"
    centers: str = "root"
    radii: str = ""
    A: str = ""
    seed: str = ""
    out: str = "."
    options: dict = field(default_factory=dict)

    def to_text(self) -> str:
        items = {f.name: getattr(self, f.name) for f in fields(self) if f.name != "options"}
        items.update({f"opt.{k}": v for k, v in self.options.items()})
        return "".join(f"{k}={items[k]}\n" for k in sorted(items))

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        base, opts = {}, {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            if not raw.strip() or raw.lstrip().startswith("#"):
                continue
            if "=" not in raw:
                raise ParameterError(f"config line {lineno}: expected key=value")
            key, val = raw.split("=", 1)
            key = key.strip()
            if key.startswith("opt."):
                opts[key[4:]] = val
            elif key in {f.name for f in fields(cls)} and key != "options":
                base[key] = val
            else:
                raise ParameterError(f"config line {lineno}: unknown key {key!r}")
        if "command" not in base:
            raise ParameterError("config has no command")
        return cls(**base, options=opts)


COMMON = ("graph", "generate", "measure", "centers", "radii", "A", "seed", "out")
SPECIFIC = {
    "green": {"D": "", "x": ""},
    "capacity": {"set_A": "", "D": ""},
    "harnack": {"cable": "", "samples": ""},
    "measure": {"x0": "", "r": "8", "cube_A": "8", "max_centers": "200"},
    "scale": {"chain": "auto"},
    "inequalities": {"C1": "0.125", "kappa": "0.125", "cutoff": "distance-linear"},
    "pipeline": {"C1": "0.125"},
    "net": {"eps": "2", "ball_radius": "4", "samples": "50"},
    "dumbbell": {"x0": ""},
    "perturb": {"C": "2", "trials": "5"},
    "generate": {},
}
DEFAULT_RADII = {"harnack": "2,4,8", "scale": "1,2,4,8", "inequalities": "2,4,8",
                 "pipeline": "2,4,8", "dumbbell": "8,16", "perturb": "2,4"}
DEFAULT_A = {"harnack": "2", "inequalities": "2", "pipeline": "2", "perturb": "2"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="harnacklab", description="Discrete potential theory and Harnack workbench.")
    p.add_argument("--version", action="version", version=f"harnacklab {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    for cmd in COMMANDS:
        s = sub.add_parser(cmd)
        s.add_argument("--config")
        src = s.add_mutually_exclusive_group()
        src.add_argument("--graph", help="graph file")
        src.add_argument("--generate", help="generator spec, e.g. lattice2d:33 or sst:2,3,4,5")
        s.add_argument("--measure", help="counting | vertex-weight | constructed | FILE")
        s.add_argument("--centers", help="root | all | comma list of vertices")
        s.add_argument("--radii", help="comma list")
        s.add_argument("--A", dest="A")
        s.add_argument("--seed")
        s.add_argument("--out")
        for key in SPECIFIC.get(cmd, {}):
            flag = "--A" if key == "set_A" else "--" + key.replace("_", "-")
            if flag == "--A":
                continue
            s.add_argument(flag, dest=key)
    return p


def _config_from_args(ns) -> RunConfig:
    cmd = ns.command
    if getattr(ns, "config", None):
        cfg = RunConfig.from_text(Path(ns.config).read_text())
        if cfg.command != cmd:
            raise UsageError(f"config is for {cfg.command!r}, not {cmd!r}")
    else:
        cfg = RunConfig(cmd, radii=DEFAULT_RADII.get(cmd, ""), A=DEFAULT_A.get(cmd, ""))
        cfg.options = dict(SPECIFIC.get(cmd, {}))
    for key in COMMON:
        val = getattr(ns, key, None)
        if val is not None:
            setattr(cfg, key, val)
    if ns.graph is not None:
        cfg.generate = ""
    if ns.generate is not None:
        cfg.graph = ""
    for key in SPECIFIC.get(cmd, {}):
        val = getattr(ns, key, None)
        if val is not None:
            cfg.options[key] = val
    if cmd == "capacity" and ns.A is not None:
        cfg.options["set_A"], cfg.A = ns.A, ""
    if not cfg.graph and not cfg.generate:
        raise UsageError(f"{cmd}: one of --graph or --generate is required")
    if cmd in RANDOMIZED and cfg.seed == "":
        raise UsageError(f"{cmd}: --seed is required for randomized sampling")
    return cfg


# ---------------------------------------------------------------------------
# argument resolution
# ---------------------------------------------------------------------------

def load_graph(cfg: RunConfig) -> WeightedGraph:
    return read_graph(cfg.graph) if cfg.graph else from_spec(cfg.generate)


def resolve_vertex(g: WeightedGraph, tok: str) -> int:
    """Vertex by label, ``v<index>`` or bare index."""
    tok = tok.strip()
    if tok == "root":
        return g.root
    if tok in g.labels:
        return g.labels.index(tok)
    body = tok[1:] if tok.startswith("v") else tok
    try:
        idx = int(body)
    except ValueError:
        raise ParameterError(f"unknown vertex {tok!r}") from None
    if not 0 <= idx < g.n:
        raise ParameterError(f"vertex {tok!r} out of range")
    return idx


def resolve_set(g: WeightedGraph, text: str) -> np.ndarray:
    """Comma list of vertices and inclusive ranges ``v1..v7``; ``ball:x:r`` for an open ball."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if part.startswith("ball:"):
            _, x, r = part.split(":")
            out.extend(g.ball(resolve_vertex(g, x), float(r)).tolist())
        elif ".." in part:
            a, b = part.split("..")
            out.extend(range(resolve_vertex(g, a), resolve_vertex(g, b) + 1))
        else:
            out.append(resolve_vertex(g, part))
    if not out:
        raise ParameterError(f"empty vertex set {text!r}")
    return np.asarray(sorted(set(out)), dtype=np.int64)


def resolve_centers(g: WeightedGraph, text: str) -> list:
    if text in ("", "root"):
        return [g.root]
    if text == "all":
        return list(range(g.n))
    return resolve_set(g, text).tolist()


def floats(text: str) -> list:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ParameterError(f"cannot parse number list {text!r}") from None


def number(text: str, name: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ParameterError(f"{name} must be a number, got {text!r}") from None


def load_measure(g: WeightedGraph, cfg: RunConfig) -> np.ndarray:
    spec = cfg.measure or "counting"
    if spec == "counting":
        return np.ones(g.n)
    if spec == "vertex-weight":
        return g.vertex_weight.copy()
    if spec == "constructed":
        gm = build_ball_measure(g, np.ones(g.n), g.root, g.eccentricity(g.root) - 1, verify=False)
        return extend_density(g, gm.density, gm.hierarchy.ball)
    vals = np.loadtxt(spec, ndmin=1)
    return check_measure(g, vals)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_generate(g, cfg, out):
    write_graph(g, out / "graph.g")
    info = {"n": g.n, "edges": g.num_edges, "root": g.root, "diameter": g.diameter,
            "spec": cfg.generate or cfg.graph}
    if cfg.generate.split(":")[0] in ("sst", "tree", "spherically_symmetric_tree"):
        info["level_sizes"] = tree_level_sizes(g)
    write_json(out / "generate.json", info)


def cmd_green(g, cfg, out):
    D = resolve_set(g, cfg.options["D"]) if cfg.options.get("D") else g.ball(g.root, max(floats(cfg.radii or "4")))
    dp = DomainProblem(g, D)
    gm = dp.green_matrix
    rows = [(int(D[i]), int(D[j]), float(gm[i, j])) for i in range(len(D)) for j in range(len(D))]
    write_csv(out / "green.csv", ["x", "y", "g"], rows)
    i, j = np.unravel_index(np.argmax(gm), gm.shape)
    summary = {"domain_size": len(D), "boundary_size": len(dp.boundary),
               "symmetry_error": float(np.abs(dp.solve(np.eye(dp.size)) - gm).max()),
               "max": {"value": float(gm[i, j]), "witness": {"x": int(D[i]), "y": int(D[j])}},
               "harmonic_measure_row_sum_error": float(np.abs(dp.harmonic_measure_matrix.sum(axis=1) - 1).max())}
    if cfg.options.get("x"):
        x = resolve_vertex(g, cfg.options["x"])
        summary["pole"] = {"x": x, "g_xx": dp.green(x, x)}
    write_json(out / "green.json", summary)


def cmd_capacity(g, cfg, out):
    if not cfg.options.get("set_A") or not cfg.options.get("D"):
        raise ParameterError("capacity needs --A and --D")
    A = resolve_set(g, cfg.options["set_A"])
    D = resolve_set(g, cfg.options["D"])
    res = capacity(g, A, D)
    hit = hitting_probability(g, A, D)
    write_json(out / "capacity.json", {
        "A": A, "D": D, "capacity": res.value, "residual": res.residual,
        "equilibrium_measure": {int(v): float(res.nu[v]) for v in A},
        "hitting_probability_gap": float(np.abs(hit - res.h).max())})
    write_csv(out / "potential.csv", ["vertex", "h", "nu"],
              [(v, float(res.h[v]), float(res.nu[v])) for v in range(g.n)])


def cmd_harnack(g, cfg, out):
    cable = int(cfg.options["cable"]) if cfg.options.get("cable") else None
    prof = ehi_profile(g, resolve_centers(g, cfg.centers), floats(cfg.radii), number(cfg.A, "A"), cable)
    header = ["x", "R", "A", "C_H", "y", "z", "b", "flag"] + (["C_H_cable"] if cable else [])
    write_csv(out / "harnack.csv", header, prof["rows"])
    write_json(out / "harnack.json", prof)


def cmd_measure(g, cfg, out):
    m = load_measure(g, cfg)
    x0 = resolve_vertex(g, cfg.options.get("x0") or "root")
    gm = build_ball_measure(g, m, x0, number(cfg.options["r"], "r"), number(cfg.options["cube_A"], "cube-A"),
                            max_centers=int(cfg.options["max_centers"]))
    ball = gm.hierarchy.ball
    write_csv(out / "measure.csv", ["vertex", "density", "mu"],
              [(int(v), float(gm.density[v]), float(gm.mu[v])) for v in ball])
    write_json(out / "measure.json", {"x0": x0, "r": float(cfg.options["r"]), "constants": gm.constants,
                                      "verification": gm.verification,
                                      "levels": [len(n) for n in gm.hierarchy.nets]})


def cmd_scale(g, cfg, out):
    mu = load_measure(g, cfg)
    centers = list(range(g.n)) if cfg.centers in ("all",) or cfg.options.get("chain") == "yes" \
        else resolve_centers(g, cfg.centers)
    sf = scale_function(g, mu, centers, floats(cfg.radii))
    rows = [(int(x), float(r), float(sf.table[i, j])) for i, x in enumerate(sf.centers)
            for j, r in enumerate(sf.radii)]
    write_csv(out / "scale.csv", ["x", "r", "psi"], rows)
    summary = {"regularity": sf.regularity, "inadmissible": sf.inadmissible,
               "singleton_inner": sf.singleton_inner}
    if len(sf.centers) == g.n and cfg.options.get("chain", "auto") in ("auto", "yes") and g.n <= 1200:
        cm = build_chain_metric(g, sf)
        summary["chain_metric"] = {"K": cm.K, "eps": cm.eps, "beta": cm.beta, "halvings": cm.halvings,
                                   "lower_ratio": cm.lower_ratio, "power_comparison_C": cm.power_comparison_C,
                                   "power_comparison_witness": cm.power_comparison_witness, "checks": chain_metric_checks(cm)}
    write_json(out / "scale.json", summary)


def cmd_inequalities(g, cfg, out):
    mu = load_measure(g, cfg)
    centers = resolve_centers(g, cfg.centers)
    radii = floats(cfg.radii)
    A = number(cfg.A, "A")
    C1 = number(cfg.options["C1"], "C1")
    sf = scale_function(g, mu, centers, radii)
    rows, cells = [], []
    for x in centers:
        for R in radii:
            row = {"x": x, "R": R, "A": A, "psi": float(sf(x, R)[0])}
            row["pi"] = pi_constant(g, x, R, A, mu, sf).to_dict()
            try:
                phi = build_cutoff(g, x, R, A * R, cfg.options["cutoff"])
                row["cs"] = cs_verify(g, x, R, A, mu, sf, phi, C1).to_dict()
            except PreconditionError as exc:
                row["cs"] = {"error": type(exc).__name__, "message": str(exc)}
            rows.append(row)
            cells.append((x, R))
    cap = cap_psi_report(g, mu, sf, cells, number(cfg.options["kappa"], "kappa"))
    write_json(out / "inequalities.json", {"cells": rows, "cap_psi": cap})
    write_csv(out / "inequalities.csv", ["x", "R", "A", "psi", "C_PI", "C2_CS"],
              [(r["x"], r["R"], r["A"], r["psi"], r["pi"]["C"], r["cs"].get("C2")) for r in rows])


def cmd_pipeline(g, cfg, out):
    m = None if cfg.measure in ("", "counting") else load_measure(g, cfg)
    dossier = characterization_pipeline(g, m, floats(cfg.radii), number(cfg.A, "A"),
                                        number(cfg.options["C1"], "C1"))
    write_json(out / "dossier.json", dossier)


def cmd_net(g, cfg, out):
    m = load_measure(g, cfg)
    eps = number(cfg.options["eps"], "eps")
    disc = discretize(g, m, eps)
    write_graph(disc.net_graph, out / "net.g")
    for name, mat in (("rst", disc.rst), ("ext", disc.ext)):
        coo = mat.tocoo()
        order = np.lexsort((coo.col, coo.row))
        write_csv(out / f"{name}.csv", ["row", "col", "value"],
                  [(int(coo.row[k]), int(coo.col[k]), float(coo.data[k])) for k in order])
    ri = rough_isometry_check(nearest_net_map(disc), g, m, disc.net_graph, disc.net_measure, max(eps, 1.0))
    center = resolve_centers(g, cfg.centers)[0]
    exp = transfer_inequality_experiment(g, m, eps, center, number(cfg.options["ball_radius"], "ball-radius"),
                                         int(cfg.options["samples"]), int(cfg.seed))
    write_json(out / "net.json", {"eps": eps, "net": disc.net, "trivial": disc.trivial,
                                  "partition": disc.partition, "rough_isometry": ri, "transfer": exp})


def cmd_dumbbell(g, cfg, out):
    x0 = resolve_vertex(g, cfg.options.get("x0") or "root")
    reps = [dumbbell_report(g, x0, R) for R in floats(cfg.radii)]
    write_csv(out / "dumbbell.csv", ["x0", "R", "pairs", "sup", "inf", "C_D"], reps)
    write_json(out / "dumbbell.json", {"reports": reps})


def cmd_perturb(g, cfg, out):
    res = perturbation_experiment(g, number(cfg.options["C"], "C"), int(cfg.options["trials"]), int(cfg.seed),
                                  resolve_centers(g, cfg.centers), floats(cfg.radii), number(cfg.A, "A"))
    write_json(out / "perturb.json", res)
    write_csv(out / "perturb.csv", ["trial", "max_inflation"], res["trials"])


HANDLERS = {name: globals()[f"cmd_{name}"] for name in COMMANDS}


def run(cfg: RunConfig) -> None:
    out = Path(cfg.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.txt").write_text(cfg.to_text())
    g = load_graph(cfg)
    HANDLERS[cfg.command](g, cfg, out)


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        ns = parser.parse_args(argv)
        if ns.command is None:
            raise UsageError(parser.format_usage() + "harnacklab: error: a command is required")
        cfg = _config_from_args(ns)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except (HarnackLabError, OSError) as exc:
        print(f"harnacklab: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    out = Path(cfg.out or ".")
    try:
        run(cfg)
    except PreconditionError as exc:
        return _fail(out, exc, EXIT_PRECONDITION)
    except OSError as exc:
        return _fail(out, exc, EXIT_PRECONDITION)
    except (ConstructionError, HarnackLabError) as exc:
        return _fail(out, exc, EXIT_CONSTRUCTION)
    return EXIT_OK


def _fail(out: Path, exc: Exception, code: int) -> int:
    print(f"harnacklab: {type(exc).__name__}: {exc}", file=sys.stderr)
    try:
        out.mkdir(parents=True, exist_ok=True)
        write_json(out / "error.json", {"error": type(exc).__name__, "message": str(exc),
                                        "witness": getattr(exc, "witness", None), "exit_code": code})
    except OSError:
        pass
    return code


if __name__ == "__main__":
    sys.exit(main())
