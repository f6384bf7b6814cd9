"""End-to-end characterization dossier.

Stages: Harnack profile, constructed measure, scale function, chain metric,
Poincare and cutoff-energy constants in the ``(d, Psi)`` and
``(d_Psi, beta)`` presentations, and the ball-capacity estimate.  A stage
that fails is recorded with its error and the later stages continue when
they can.
"""

from __future__ import annotations

import math

import numpy as np

from .dirichlet import check_measure
from .dyadic import build_ball_measure, extend_density
from .errors import HarnackLabError
from .graph_core import DIST_TOL, WeightedGraph
from .harnack import ehi_profile
from .inequalities import (build_cutoff, cap_psi_report, cs_verify, cs_verify_sets, linear_cutoff,
                           pi_constant, pi_constant_sets, psi_value)
from .report import SCHEMA_VERSION
from .scale import annuli_comparison, build_chain_metric, chain_metric_checks, scale_function

EHI_GROWTH_LIMIT = 2.0


def _psi_radii(radii, A: float) -> list:
    top = max(radii) * A
    out = {float(r) for r in radii}
    s = 1.0
    while s <= top + DIST_TOL:
        out.add(s)
        s *= 2
    return sorted(out)


def _error(exc: Exception) -> dict:
    out = {"error": type(exc).__name__, "message": str(exc)}
    wit = getattr(exc, "witness", None)
    if wit is not None:
        out["witness"] = wit
    return out


def characterization_pipeline(g: WeightedGraph, m=None, radii=(2, 4, 8), A: float = 2.0,
                              C1: float = 0.125, chain_limit: int = 1200,
                              verify_centers: int = 50) -> dict:
    """Run every stage at the root of ``g`` and collect the constants.

    ``m`` defaults to counting measure.  The measure is built on the closed
    ball ``B(root, ecc - 1)`` and extended to the rest of the graph by the
    nearest ball vertex.  The chain metric is skipped above ``chain_limit``
    vertices (all-pairs cost).
    """
    x = g.root
    m = np.ones(g.n) if m is None else check_measure(g, m)
    radii = sorted(float(r) for r in radii)
    flags: list = []
    stages: dict = {}

    prof = ehi_profile(g, [x], radii, A)
    by_r = prof["max_by_radius"]
    first, last = by_r[radii[0]], by_r[radii[-1]]
    growth = last / first if first and last else None
    stages["ehi"] = {"profile": prof, "growth": growth}
    if growth is None or growth > EHI_GROWTH_LIMIT:
        flags.append("ehi_profile_not_flat")

    r0 = g.eccentricity(x) - 1
    mu = m.copy()
    try:
        gm = build_ball_measure(g, m, x, r0, max_centers=verify_centers)
        ball = gm.hierarchy.ball
        density = extend_density(g, gm.density, ball)
        mu = density * m
        stages["measure"] = {"radius": r0, "constants": gm.constants, "verification": gm.verification}
        if not gm.verification["capacity_good"]:
            flags.append("measure_not_capacity_good")
    except HarnackLabError as exc:
        stages["measure"] = _error(exc)
        flags.append("measure_failed")

    full = g.n <= chain_limit
    centers = np.arange(g.n) if full else np.array([x])
    sf = scale_function(g, mu, centers, _psi_radii(radii, A))
    stages["scale"] = {"radii": sf.radii.tolist(), "root_values": sf.row(x).tolist(),
                       "root_exponent": sf.exponent(x), "regularity": sf.regularity,
                       "inadmissible": len(sf.inadmissible)}

    cm = None
    if full:
        try:
            cm = build_chain_metric(g, sf)
            stages["chain_metric"] = {"K": cm.K, "eps": cm.eps, "beta": cm.beta, "halvings": cm.halvings,
                                      "lower_ratio": cm.lower_ratio, "power_comparison_C": cm.power_comparison_C,
                                      "power_comparison_witness": cm.power_comparison_witness, "checks": chain_metric_checks(cm)}
        except HarnackLabError as exc:
            stages["chain_metric"] = _error(exc)
            flags.append("chain_metric_failed")
    else:
        stages["chain_metric"] = {"skipped": f"graph has more than {chain_limit} vertices"}

    cells = []
    for R in radii:
        cell: dict = {"R": R}
        try:
            cell["pi"] = pi_constant(g, x, R, A, mu, sf).to_dict()
        except HarnackLabError as exc:
            cell["pi"] = _error(exc)
        try:
            phi = build_cutoff(g, x, R, A * R)
            cell["cs"] = cs_verify(g, x, R, A, mu, sf, phi, C1).to_dict()
        except HarnackLabError as exc:
            cell["cs"] = _error(exc)
        if cm is not None:
            cell.update(_chain_presentation(g, cm, sf, mu, x, R, A, C1))
        cells.append(cell)
    stages["inequalities"] = cells
    stages["inequalities_max"] = _maxima(cells)

    try:
        stages["cap_psi"] = cap_psi_report(g, mu, sf, [(x, R) for R in radii], 1 / 8)
    except HarnackLabError as exc:
        stages["cap_psi"] = _error(exc)

    return {"schema_version": SCHEMA_VERSION, "graph": {"n": g.n, "edges": g.num_edges, "root": x},
            "parameters": {"radii": radii, "A": float(A), "C1": C1}, "stages": stages,
            "flags": flags}


def _chain_presentation(g, cm, sf, mu, x, R, A, C1) -> dict:
    """PI and CS in the chain metric at the radius ``rho`` with ``rho^beta = Psi(x, R)``."""
    rho = psi_value(sf, x, R) ** (1.0 / cm.beta)
    row = cm.d_psi[x]
    inner = np.flatnonzero(row < rho - DIST_TOL)
    outer = np.flatnonzero(row < A * rho - DIST_TOL)
    out: dict = {"rho": rho}
    pi_b = pi_constant_sets(g, inner, outer, mu, rho ** cm.beta)
    out["pi_chain"] = pi_b.to_dict()
    if len(outer) < g.n:
        phi = linear_cutoff(row, rho, A * rho)
        out["cs_chain"] = cs_verify_sets(g, inner, outer, mu, rho ** cm.beta, phi, C1).to_dict()
    else:
        out["cs_chain"] = {"error": "TopologyError", "message": "chain ball is the whole graph"}
    ann = annuli_comparison(g.distance_matrix, cm.d_psi, x, R, A)
    out["annuli"] = ann
    pi_d = pi_constant(g, x, R, A, mu, sf).C
    ratio = pi_d / pi_b.C if pi_b.C > 0 else None
    out["pi_ratio"] = ratio
    bound = cm.power_comparison_C * ann["eta_needed"] ** cm.beta if math.isfinite(ann["eta_needed"]) else math.inf
    out["pi_ratio_bound"] = bound
    out["pi_comparable"] = ratio is not None and 1 / bound <= ratio <= bound
    return out


def _maxima(cells) -> dict:
    out = {}
    for key in ("pi", "cs", "pi_chain", "cs_chain"):
        field_name = "C" if key.startswith("pi") else "C2"
        vals = [(c[key][field_name], c["R"]) for c in cells if key in c and field_name in c[key]]
        if vals:
            v, R = max(vals)
            out[key] = {"value": v, "witness": {"R": R}}
    return out


__all__ = ["characterization_pipeline"]
