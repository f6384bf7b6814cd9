"""Exact worst-case Harnack constants and experiments built on them.

For a domain ``D`` with boundary ``dD``, every nonnegative function harmonic
on ``D`` is a nonnegative combination of the columns ``K(., b)`` of the
harmonic measure.  The ratio ``h(y)/h(z)`` is therefore maximized at a
single column, so

    C_H = max_b max_{y,z in inner} K(y, b) / K(z, b)

is the exact constant.

Balls are read through the cable system.  A cable function harmonic on the
open ball ``B(x, AR)`` is graph-harmonic at every vertex with
``d < AR`` and linear on edges, so the domain is the open vertex ball and
its boundary is the outer vertex boundary.  The supremum over the open
cable ball ``B(x, R)`` equals the maximum over vertices with ``d <= R``,
so the inner set is the closed vertex ball.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .dirichlet import DomainProblem, check_measure
from .errors import ParameterError, PreconditionError, TopologyError
from .graph_core import WeightedGraph, as_index_array, subdivide_edges
from .parallel import pmap
from .potential import capacity
from .sampling import make_rng


@dataclass(frozen=True)
class HarnackReport:
    x: int
    R: float
    A: float
    C_H: float
    y: int
    z: int
    b: int
    inner_size: int
    domain_size: int


def _poisson_rows(dp: DomainProblem, inner: np.ndarray) -> np.ndarray:
    """Rows of the harmonic measure at ``inner`` (points of ``dD`` get unit rows)."""
    rows = np.zeros((len(inner), len(dp.boundary)))
    in_d = dp.position[inner] >= 0
    on_b = dp.bposition[inner] >= 0
    if not np.all(in_d | on_b):
        raise ParameterError("inner set must lie in the closure of the domain")
    if np.any(in_d):
        pts = inner[in_d]
        rhs = np.zeros((dp.size, len(pts)))
        rhs[dp.position[pts], np.arange(len(pts))] = 1.0
        green_cols = dp.solve(rhs).reshape(dp.size, len(pts))
        rows[in_d] = (dp.W_DB.T @ green_cols).T
    rows[np.flatnonzero(on_b), dp.bposition[inner[on_b]]] = 1.0
    return rows


def worst_ratio(rows: np.ndarray) -> tuple[float, int, int, int]:
    """``max_b max_{y,z} rows[y,b]/rows[z,b]`` with witnesses (0/0 counts as 1)."""
    hi = rows.max(axis=0)
    lo = rows.min(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(hi == 0, 1.0, hi / lo)
    b = int(np.argmax(ratio))
    return float(ratio[b]), int(np.argmax(rows[:, b])), int(np.argmin(rows[:, b])), b


def harnack_constant_sets(g: WeightedGraph, inner, domain) -> HarnackReport:
    """Exact Harnack constant for explicit inner set and domain."""
    inner = as_index_array(inner)
    dp = DomainProblem(g, domain)
    rows = _poisson_rows(dp, inner)
    c, yi, zi, bi = worst_ratio(rows)
    return HarnackReport(-1, float("nan"), float("nan"), c, int(inner[yi]), int(inner[zi]),
                         int(dp.boundary[bi]), len(inner), dp.size)


def harmonic_domain(g: WeightedGraph, x: int, radius: float) -> np.ndarray:
    ball = g.ball(x, radius)
    if len(ball) == g.n:
        raise TopologyError(f"B({x}, {radius}) is the whole graph")
    return ball


def inner_set(g: WeightedGraph, x: int, R: float) -> np.ndarray:
    return g.ball(x, R, closed=True)


def harnack_constant(g: WeightedGraph, x: int, R: float, A: float) -> HarnackReport:
    """Worst ratio ``sup/inf`` over ``B(x, R)`` of positive harmonic functions on ``B(x, AR)``."""
    if R <= 0 or A <= 1:
        raise ParameterError("need R > 0 and A > 1")
    domain = harmonic_domain(g, x, A * R)
    if len(domain) == 0:
        raise TopologyError("harmonic domain is empty")
    inner = inner_set(g, x, R)
    rep = harnack_constant_sets(g, inner, domain)
    return HarnackReport(int(x), float(R), float(A), rep.C_H, rep.y, rep.z, rep.b,
                         rep.inner_size, rep.domain_size)


def random_data_ratio(g: WeightedGraph, x: int, R: float, A: float, samples: int, seed: int) -> float:
    """Largest ``sup/inf`` over ``B(x,R)`` among random nonnegative boundary data."""
    domain = harmonic_domain(g, x, A * R)
    dp = DomainProblem(g, domain)
    rows = _poisson_rows(dp, inner_set(g, x, R))
    rng = make_rng(seed)
    data = rng.random((len(dp.boundary), samples)) ** 4
    vals = rows @ data
    return float((vals.max(axis=0) / vals.min(axis=0)).max())


def ehi_profile(g: WeightedGraph, centers, radii, A: float, cable_k: int | None = None) -> dict:
    """Table of exact Harnack constants; inadmissible cells are flagged, not fatal.

    With ``cable_k`` every cell is also evaluated on the ``cable_k``-fold
    subdivision (same centers and radii) and reported as ``C_H_cable``.
    """
    cable = subdivide_edges(g, cable_k) if cable_k else None
    cells = [(int(x), float(R)) for x in centers for R in radii]

    def one(cell):
        x, R = cell
        row = {"x": x, "R": R, "A": float(A)}
        try:
            rep = harnack_constant(g, x, R, A)
            row.update(C_H=rep.C_H, y=rep.y, z=rep.z, b=rep.b, flag="")
        except PreconditionError as exc:
            row.update(C_H=None, y=None, z=None, b=None, flag=str(exc))
        if cable is not None:
            try:
                row["C_H_cable"] = harnack_constant(cable, x, R, A).C_H
            except PreconditionError:
                row["C_H_cable"] = None
        return row

    rows = pmap(one, cells)
    vals = [r["C_H"] for r in rows if r["C_H"] is not None]
    per_radius = {}
    for R in radii:
        cv = [r["C_H"] for r in rows if r["R"] == float(R) and r["C_H"] is not None]
        per_radius[float(R)] = max(cv) if cv else None
    return {"A": float(A), "rows": rows, "max": max(vals) if vals else None,
            "max_by_radius": per_radius, "skipped": sum(r["C_H"] is None for r in rows)}


def bg_report(g: WeightedGraph, m, r0: float, radii, centers=None) -> dict:
    """Small-scale volume doubling and occupation-time growth constants.

    ``vds``: worst ``m(B(x,2r))/m(B(x,r))``.  ``eois``: with
    ``Q(x,s) = m(B(x,s)) / Cap_{B(x,8s)}(B(x,s))``, ``gamma2`` is the
    least-squares slope through the origin of ``log(Q(x,r)/Q(x,s))`` against
    ``log(r/s)`` and ``C_L = max Q(x,s)/Q(x,r) * (r/s)^gamma2`` over pairs
    ``s < r``.  Cells whose capacity domain covers the graph are flagged.
    """
    m = check_measure(g, m)
    radii = sorted(float(r) for r in radii)
    if any(r <= 0 or r > r0 for r in radii):
        raise ParameterError("radii must lie in (0, r0]")
    centers = range(g.n) if centers is None else centers
    vds, vds_wit = 1.0, None
    flagged = 0
    logs_x, logs_y, pairs = [], [], []
    for x in centers:
        q = {}
        for r in radii:
            mb = m[g.ball(x, r)].sum()
            ratio = m[g.ball(x, 2 * r)].sum() / mb
            if ratio > vds:
                vds, vds_wit = float(ratio), {"x": int(x), "r": r}
            dom = g.ball(x, 8 * r)
            if len(dom) == g.n:
                flagged += 1
                continue
            inner = g.ball(x, r)
            q[r] = mb / capacity(g, inner, dom).value
        ks = sorted(q)
        for i, s in enumerate(ks):
            for r in ks[i + 1:]:
                logs_x.append(np.log(r / s))
                logs_y.append(np.log(q[r] / q[s]))
                pairs.append((int(x), s, r))
    out = {"vds_constant": vds, "vds_witness": vds_wit, "flagged_cells": flagged}
    if pairs:
        lx, ly = np.array(logs_x), np.array(logs_y)
        gamma2 = float(lx @ ly / (lx @ lx))
        vals = np.exp(-ly + gamma2 * lx)
        i = int(np.argmax(vals))
        out.update(gamma2=gamma2, eois_constant=float(vals[i]),
                   eois_witness={"x": pairs[i][0], "s": pairs[i][1], "r": pairs[i][2]})
    else:
        out.update(gamma2=None, eois_constant=None, eois_witness=None)
    return out


def perturb_weights(g: WeightedGraph, C: float, seed: int, stream: int = 0) -> WeightedGraph:
    """Multiply each weight by an independent log-uniform factor in ``[1/C, C]``."""
    if C < 1:
        raise ParameterError("perturbation factor must be >= 1")
    if C == 1:
        return g.with_weights(g.weights)
    rng = make_rng(seed, stream)
    factors = np.exp(rng.uniform(-np.log(C), np.log(C), g.num_edges))
    return g.with_weights(g.weights * factors)


def perturbation_experiment(g: WeightedGraph, C: float, trials: int, seed: int,
                            centers=None, radii=(2, 4), A: float = 2.0) -> dict:
    """Harnack profiles before and after bounded random conductance changes.

    ``inflation`` of a cell is ``C_H(perturbed) / C_H(original)``; the report
    carries the worst inflation per trial and overall.
    """
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    centers = [g.root] if centers is None else list(centers)
    base = ehi_profile(g, centers, radii, A)
    out_trials = []
    worst = 0.0
    for t in range(trials):
        gp = perturb_weights(g, C, seed, t)
        prof = ehi_profile(gp, centers, radii, A)
        infl = []
        for b0, b1 in zip(base["rows"], prof["rows"]):
            if b0["C_H"] is not None and b1["C_H"] is not None:
                infl.append(b1["C_H"] / b0["C_H"])
        tw = max(infl) if infl else None
        worst = max(worst, tw or 0.0)
        out_trials.append({"trial": t, "max_inflation": tw,
                           "C_H": [r["C_H"] for r in prof["rows"]]})
    return {"C": float(C), "seed": int(seed), "A": float(A),
            "base": [r["C_H"] for r in base["rows"]],
            "cells": [[r["x"], r["R"]] for r in base["rows"]],
            "trials": out_trials, "max_inflation": worst}


def report_dict(rep: HarnackReport) -> dict:
    return asdict(rep)


__all__ = [
    "HarnackReport", "harnack_constant", "harnack_constant_sets", "ehi_profile", "bg_report",
    "perturb_weights", "perturbation_experiment", "random_data_ratio", "worst_ratio",
    "harmonic_domain", "inner_set",
]
