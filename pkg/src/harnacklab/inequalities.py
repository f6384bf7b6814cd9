"""Best constants for Poincare, cutoff-energy and ball-capacity inequalities.

Each inequality quantified over all functions is closed into a matrix
partial order and resolved by one generalized symmetric eigenproblem.

Integrals over a vertex set ``U`` use the energy density ``gamma``:
``int_U dGamma(u,u) = sum_{x in U} gamma_u(x)``, so an edge counts with
half its weight for each endpoint in ``U``.  Vertices outside ``U`` adjacent
to it are free in "for all u"; they are eliminated by a Schur complement,
which gives the smallest possible right-hand side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.sparse import csgraph

from .dirichlet import check_measure, gamma_measure, neumann_laplacian
from .errors import ParameterError, PreconditionError, TopologyError
from .graph_core import DIST_TOL, WeightedGraph, as_index_array, epsilon_net
from .potential import capacity

PSD_TOL = 1e-9


def psi_value(psi, x: int, r: float) -> float:
    """Evaluate a scale function given as a callable ``psi(x, r)`` or a constant."""
    if callable(psi):
        return float(np.asarray(psi(x, r), dtype=float).ravel()[0])
    return float(psi)


# ---------------------------------------------------------------------------
# Poincare inequality
# ---------------------------------------------------------------------------

@dataclass
class PIReport:
    inner_size: int
    outer_size: int
    psi: float
    C: float
    rayleigh: float
    witness: np.ndarray = field(repr=False)
    x: int = -1
    R: float = float("nan")
    A: float = float("nan")

    def to_dict(self) -> dict:
        return {"x": self.x, "R": self.R, "A": self.A, "psi": self.psi, "C": self.C,
                "inner_size": self.inner_size, "outer_size": self.outer_size,
                "witness": {"rayleigh": self.rayleigh,
                            "f": {int(v): float(self.witness[v]) for v in np.flatnonzero(~np.isnan(self.witness))}}}


def _pi_forms(g: WeightedGraph, inner, outer, mu):
    outer = as_index_array(outer)
    inner = as_index_array(inner)
    if not np.all(np.isin(inner, outer)):
        raise ParameterError("inner ball must lie in the outer ball")
    pos = np.searchsorted(outer, inner)
    k = len(outer)
    mi = mu[inner]
    M = np.zeros((k, k))
    M[pos, pos] = mi
    M[np.ix_(pos, pos)] -= np.outer(mi, mi) / mi.sum()
    L = neumann_laplacian(g, outer).toarray()
    return inner, outer, M, L


def pi_rayleigh(g: WeightedGraph, inner, outer, mu, f) -> float:
    """``sum_inner mu (f - mean)^2 / E_outer(f, f)`` for a full-length ``f``."""
    mu = check_measure(g, mu)
    inner, outer = as_index_array(inner), as_index_array(outer)
    f = np.asarray(f, dtype=float)
    mean = mu[inner] @ f[inner] / mu[inner].sum()
    num = float(mu[inner] @ (f[inner] - mean) ** 2)
    L = neumann_laplacian(g, outer)
    den = float(f[outer] @ (L @ f[outer]))
    return num / den if den > 0 else (0.0 if num == 0 else math.inf)


def pi_constant_sets(g: WeightedGraph, inner, outer, mu, psi: float) -> PIReport:
    """Best Poincare constant for explicit vertex sets.

    ``C = max_f sum_inner mu (f - f_mu)^2 / (psi E_outer(f,f))`` where
    ``E_outer`` is the energy of the subgraph induced on ``outer``.  The
    maximum is the top generalized eigenvalue on the complement of the
    constants.  Graph-metric balls induce connected subgraphs; for other
    sets (chain-metric balls) components missing ``inner`` drop out of both
    sides, and ``C = inf`` when ``inner`` meets two components, witnessed by
    the indicator of one of them.
    """
    mu = check_measure(g, mu)
    if psi <= 0:
        raise ParameterError("scale value must be positive")
    inner, outer = as_index_array(inner), as_index_array(outer)
    ncomp, labels = csgraph.connected_components(neumann_laplacian(g, outer), directed=False)
    if ncomp > 1:
        hit = np.unique(labels[np.searchsorted(outer, inner[np.isin(inner, outer)])])
        if len(hit) > 1:
            wit = np.full(g.n, np.nan)
            wit[outer] = (labels == hit[0]).astype(float)
            return PIReport(len(inner), len(outer), psi, math.inf, math.inf, wit)
        if len(hit) == 1:
            outer = outer[labels == hit[0]]
    inner, outer, M, L = _pi_forms(g, inner, outer, mu)
    wit = np.full(g.n, np.nan)
    if len(inner) <= 1:
        wit[outer] = 0.0
        return PIReport(len(inner), len(outer), psi, 0.0, 0.0, wit)
    Q = sla.null_space(np.ones((1, len(outer))))
    Lq = Q.T @ L @ Q
    Mq = Q.T @ M @ Q
    vals, vecs = sla.eigh(Mq, Lq)
    lam = float(max(vals[-1], 0.0))
    wit[outer] = Q @ vecs[:, -1]
    return PIReport(len(inner), len(outer), psi, lam / psi, lam, wit)


def pi_constant(g: WeightedGraph, x: int, R: float, A: float, mu, psi) -> PIReport:
    """Poincare constant for ``B(x, R)`` inside ``B(x, AR)`` (open balls)."""
    if R <= 0 or A < 1:
        raise ParameterError("need R > 0 and A >= 1")
    rep = pi_constant_sets(g, g.ball(x, R), g.ball(x, A * R), mu, psi_value(psi, x, R))
    rep.x, rep.R, rep.A = int(x), float(R), float(A)
    return rep


# ---------------------------------------------------------------------------
# cutoff functions
# ---------------------------------------------------------------------------

@dataclass
class CutoffFunction:
    values: np.ndarray
    kind: str
    inner: np.ndarray
    outer: np.ndarray


def linear_cutoff(drow: np.ndarray, R1: float, R2: float) -> np.ndarray:
    """``clamp((R2 - d)/(R2 - R1), 0, 1)`` for a row of distances."""
    if R1 >= R2:
        raise ParameterError("need R1 < R2")
    return np.clip((R2 - np.asarray(drow, dtype=float)) / (R2 - R1), 0.0, 1.0)


def check_cutoff(phi, inner, outer, n: int | None = None) -> dict:
    """Exhaustive range and support check: 1 on ``inner``, 0 off ``outer``, values in [0, 1]."""
    phi = np.asarray(phi, dtype=float)
    n = len(phi) if n is None else n
    inner, outer = as_index_array(inner) if len(inner) else np.array([], dtype=np.int64), as_index_array(outer)
    off = np.setdiff1d(np.arange(n), outer)
    ones = bool(np.all(phi[inner] == 1.0))
    zeros = bool(np.all(phi[off] == 0.0))
    rng = bool(np.all((phi >= 0) & (phi <= 1)))
    return {"ok": ones and zeros and rng, "one_on_inner": ones, "zero_off_outer": zeros, "range": rng}


def build_cutoff(g: WeightedGraph, x: int, R1: float, R2: float,
                 kind: str = "distance-linear") -> CutoffFunction:
    """Cutoff for ``B(x, R1)`` inside ``B(x, R2)``.

    ``distance-linear``: ``clamp((R2 - d(x,.))/(R2 - R1), 0, 1)``.
    ``equilibrium``: the equilibrium potential of ``B(x,R1)`` in ``B(x,R2)``.
    """
    if R1 >= R2:
        raise ParameterError("need R1 < R2")
    inner, outer = g.ball(x, R1), g.ball(x, R2)
    if len(outer) == g.n:
        if len(inner) == g.n:
            return CutoffFunction(np.ones(g.n), kind, inner, outer)
        raise TopologyError(f"B({x}, {R2}) is the whole graph but B({x}, {R1}) is not")
    if kind == "distance-linear":
        phi = linear_cutoff(g.distances_from(x), R1, R2)
    elif kind == "equilibrium":
        phi = capacity(g, inner, outer).h.copy()
    else:
        raise ParameterError(f"unknown cutoff kind {kind!r}")
    return CutoffFunction(phi, kind, inner, outer)


# ---------------------------------------------------------------------------
# cutoff energy inequality
# ---------------------------------------------------------------------------

def annulus_energy_form(g: WeightedGraph, U) -> np.ndarray:
    """Matrix ``S`` on ``U`` with ``u^T S u = min over outside values of sum_{x in U} gamma_u(x)``."""
    U = as_index_array(U)
    inU = np.zeros(g.n, dtype=bool)
    inU[U] = True
    a, b = g.edges[:, 0], g.edges[:, 1]
    c = g.weights * 0.5 * (inU[a].astype(float) + inU[b].astype(float))
    keep = c > 0
    a, b, c = a[keep], b[keep], c[keep]
    touched = np.union1d(U, np.union1d(a, b))
    out = np.setdiff1d(touched, U)
    order = np.concatenate([U, out])
    pos = np.full(g.n, -1, dtype=np.int64)
    pos[order] = np.arange(len(order))
    k = len(order)
    G = np.zeros((k, k))
    pa, pb = pos[a], pos[b]
    np.add.at(G, (pa, pa), c)
    np.add.at(G, (pb, pb), c)
    np.add.at(G, (pa, pb), -c)
    np.add.at(G, (pb, pa), -c)
    nu = len(U)
    S = G[:nu, :nu]
    if len(out):
        goo = np.diag(G)[nu:]
        guo = G[:nu, nu:]
        S = S - (guo / goo) @ guo.T
    return 0.5 * (S + S.T)


@dataclass
class CSReport:
    U: np.ndarray = field(repr=False)
    psi: float
    C1: float
    C2: float
    lambda_max: float
    witness: np.ndarray = field(repr=False)
    Phi: np.ndarray = field(repr=False)
    S: np.ndarray = field(repr=False)
    M: np.ndarray = field(repr=False)
    x: int = -1
    R: float = float("nan")
    A: float = float("nan")

    def to_dict(self) -> dict:
        return {"x": self.x, "R": self.R, "A": self.A, "psi": self.psi, "C1": self.C1,
                "C2": self.C2, "annulus_size": int(len(self.U)),
                "witness": {"lambda_max": self.lambda_max,
                            "u": {int(v): float(w) for v, w in zip(self.U, self.witness)}}}


def cs_verify_sets(g: WeightedGraph, inner, outer, mu, psi: float, phi, C1: float = 0.125) -> CSReport:
    """Smallest ``C2`` in the cutoff-energy inequality on ``U = outer \\ inner``.

    ``sum_U u^2 gamma_phi <= C1 sum_U gamma_u + C2/psi sum_U u^2 mu`` for
    all ``u``; ``C2 = psi max(lambda_max, 0)`` with ``lambda_max`` the top
    generalized eigenvalue of ``diag(gamma_phi) - C1 S`` against
    ``diag(mu)`` on ``U``.
    """
    mu = check_measure(g, mu)
    phi = np.asarray(phi, dtype=float)
    inner = as_index_array(inner) if len(inner) else np.array([], dtype=np.int64)
    outer = as_index_array(outer)
    chk = check_cutoff(phi, inner, outer, g.n)
    if not chk["ok"]:
        raise ParameterError(f"phi is not a cutoff function: {chk}")
    if C1 < 0 or psi <= 0:
        raise ParameterError("need C1 >= 0 and psi > 0")
    U = np.setdiff1d(outer, inner)
    if len(U) == 0:
        z = np.zeros((0, 0))
        return CSReport(U, psi, C1, 0.0, 0.0, np.zeros(0), z, z, np.zeros(0))
    Phi = gamma_measure(g, phi)[U]
    S = annulus_energy_form(g, U)
    M = mu[U]
    vals, vecs = sla.eigh(np.diag(Phi) - C1 * S, np.diag(M))
    lam = float(vals[-1])
    C2 = psi * max(lam, 0.0)
    return CSReport(U, psi, C1, C2, lam, vecs[:, -1], Phi, S, M)


def cs_verify(g: WeightedGraph, x: int, R: float, A: float, mu, psi, phi, C1: float = 0.125) -> CSReport:
    """Cutoff-energy constant for ``B(x,R)`` inside ``B(x,AR)`` and a given cutoff."""
    phi = phi.values if isinstance(phi, CutoffFunction) else phi
    rep = cs_verify_sets(g, g.ball(x, R), g.ball(x, A * R), mu, psi_value(psi, x, R), phi, C1)
    rep.x, rep.R, rep.A = int(x), float(R), float(A)
    return rep


def cs_margin(rep: CSReport, C2: float) -> float:
    """Smallest eigenvalue of ``M^-1/2 (C1 S + C2/psi M - Phi) M^-1/2`` (standard symmetric route)."""
    if len(rep.U) == 0:
        return 0.0
    s = 1.0 / np.sqrt(rep.M)
    form = rep.C1 * rep.S + np.diag(C2 / rep.psi * rep.M - rep.Phi)
    return float(np.linalg.eigvalsh(s[:, None] * form * s[None, :])[0])


def cs_psd_holds(rep: CSReport, C2: float) -> bool:
    if len(rep.U) == 0:
        return True
    scale = max(1.0, float(np.abs(rep.Phi / rep.M).max()), rep.C1 * float(np.abs(rep.S).max() / rep.M.min()))
    return cs_margin(rep, C2) >= -PSD_TOL * scale


def cs_witness_value(rep: CSReport) -> float:
    """``psi (u^T Phi u - C1 u^T S u) / u^T M u`` at the witness."""
    u = rep.witness
    if len(u) == 0:
        return 0.0
    return rep.psi * float(u @ (rep.Phi * u) - rep.C1 * u @ rep.S @ u) / float(u @ (rep.M * u))


# ---------------------------------------------------------------------------
# cutoffs for general annuli
# ---------------------------------------------------------------------------

def annulus_cutoff(g: WeightedGraph, x0: int, R: float, r: float, psi, mu, A_cs: float = 2.0,
                   n: int | None = None, C1: float = 0.125, cs_kind: str = "distance-linear") -> dict:
    """Averaged cutoff for ``B(x0,R)`` inside ``B(x0,R+r)`` with gradient factor ``C1``.

    The ball ``B(x0,R+r)`` is covered by ``B(z_i, r/n)`` around a greedy
    ``r/n``-separated net; each ``z_i`` carries a cutoff ``phi_i`` for
    ``B(z_i, r/n)`` inside ``B(z_i, A r/n)``; ``psi_j`` is the maximum of
    the ``phi_i`` with ``z_i`` in ``B(x0, R + j r/n)`` and the result is
    the mean of ``psi_j`` over ``A+3 <= j <= n-A-2``.  The zero-order
    multiplier in front of ``int_U f^2 dmu / Psi(x0, r)`` is then computed
    exactly at gradient factor ``C1``.  If the average is not a cutoff
    (coarse graphs), ``n`` is decreased and the change flagged.
    """
    mu = check_measure(g, mu)
    if r <= 0 or R < 0:
        raise ParameterError("need r > 0 and R >= 0")
    A = int(math.ceil(A_cs))
    n0 = 8 * (A + 8) if n is None else int(n)
    if n0 < 2 * A + 5:
        raise ParameterError(f"n must be at least 2A+5 = {2 * A + 5}")
    outer = g.ball(x0, R + r)
    if len(outer) == g.n:
        raise TopologyError(f"B({x0}, {R + r}) is the whole graph")
    inner = g.ball(x0, R)
    d0 = g.distances_from(x0)
    flags = []
    for nn in range(n0, 2 * A + 4, -1):
        rho = r / nn
        net = epsilon_net(g, rho, candidates=outer, seeds=(x0,), include_root=False)
        rows = np.array([g.distances_from(z) for z in net])
        phis = np.clip((A * rho - rows) / ((A - 1) * rho), 0.0, 1.0) if cs_kind == "distance-linear" else \
            np.array([build_cutoff(g, z, rho, A * rho, cs_kind).values for z in net])
        dz = d0[net]
        js = np.arange(A + 3, nn - A - 1)
        acc = np.zeros(g.n)
        for j in js:
            sel = dz < R + j * rho - DIST_TOL
            if np.any(sel):
                acc += phis[sel].max(axis=0)
        phi = acc / len(js)
        phi[np.abs(phi - 1.0) < 1e-12] = 1.0
        if check_cutoff(phi, inner, outer, g.n)["ok"]:
            break
        flags.append(f"n={nn} does not yield a cutoff")
    else:
        raise PreconditionError("no admissible covering parameter n")
    multiplicity = int((rows < A * rho - DIST_TOL)[:, outer].sum(axis=0).max())
    rep = cs_verify_sets(g, inner, outer, mu, psi_value(psi, x0, r), phi, C1)
    factor = (R + r) / r
    return {"x0": int(x0), "R": float(R), "r": float(r), "A": A, "n": nn, "n_requested": n0,
            "flags": flags, "cover_size": int(len(net)), "multiplicity": multiplicity,
            "singleton_cover": bool(rho < g.min_length), "gradient_coefficient": C1,
            "zero_order": rep.C2, "ratio_factor": factor, "phi": phi, "report": rep,
            "psd_holds": cs_psd_holds(rep, rep.C2)}


def annulus_gamma_fit(g: WeightedGraph, x0: int, Rs, r: float, psi, mu, **kw) -> dict:
    """Fit ``zero_order ~ C_E ((R+r)/r)^gamma`` over several inner radii."""
    runs = [annulus_cutoff(g, x0, R, r, psi, mu, **kw) for R in Rs]
    lx = np.log([run["ratio_factor"] for run in runs])
    zs = np.array([run["zero_order"] for run in runs])
    if np.any(zs <= 0) or len(runs) < 2 or np.ptp(lx) == 0:
        gamma = 0.0
    else:
        gamma = max(0.0, float(np.polyfit(lx, np.log(zs), 1)[0]))
    ce = zs / np.exp(gamma * lx)
    i = int(np.argmax(ce))
    return {"gamma": gamma, "C_E": float(ce[i]), "witness": {"R": float(Rs[i]), "r": float(r)},
            "zero_order": zs.tolist(), "ratio_factor": np.exp(lx).tolist()}


# ---------------------------------------------------------------------------
# energy measure of maxima, capacity estimate
# ---------------------------------------------------------------------------

def energy_of_max_check(g: WeightedGraph, f, phi1, phi2) -> dict:
    """Both sides of ``sum f^2 gamma_{phi1 v phi2} <= sum f^2 (gamma_phi1 + gamma_phi2)``."""
    f2 = np.asarray(f, dtype=float) ** 2
    p1, p2 = np.asarray(phi1, dtype=float), np.asarray(phi2, dtype=float)
    lhs = float(f2 @ gamma_measure(g, np.maximum(p1, p2)))
    rhs = float(f2 @ gamma_measure(g, p1) + f2 @ gamma_measure(g, p2))
    return {"lhs": lhs, "rhs": rhs, "margin": rhs - lhs}


def cap_psi_report(g: WeightedGraph, mu, psi, cells, kappa: float) -> dict:
    """Two-sided constant in ``Cap_{B(x,r)}(B(x,kappa r)) ~ mu(B(x,r))/Psi(x,r)``.

    ``ratio = Cap * Psi / mu(B)``; the constant is the worst of ``ratio`` and
    its reciprocal.  Cells whose ball covers the graph are skipped.  An
    empty inner ball is replaced by its center.
    """
    if not 0 < kappa < 1:
        raise ParameterError("kappa must lie in (0, 1)")
    mu = check_measure(g, mu)
    rows, skipped = [], []
    for x, r in cells:
        ball = g.ball(x, r)
        if len(ball) == g.n:
            skipped.append([int(x), float(r)])
            continue
        inner = g.ball(x, kappa * r)
        inner = inner if len(inner) else np.array([x])
        cap = capacity(g, inner, ball).value
        p = psi_value(psi, x, r)
        rows.append({"x": int(x), "r": float(r), "cap": cap, "psi": p, "mass": float(mu[ball].sum()),
                     "ratio": cap * p / float(mu[ball].sum())})
    if not rows:
        raise PreconditionError("no admissible cell")
    ratios = np.array([row["ratio"] for row in rows])
    iu, il = int(np.argmax(ratios)), int(np.argmin(ratios))
    upper, lower = float(ratios[iu]), float(1.0 / ratios[il])
    return {"kappa": kappa, "upper": upper, "lower": lower, "C": max(upper, lower, 1.0),
            "upper_witness": {"x": rows[iu]["x"], "r": rows[iu]["r"]},
            "lower_witness": {"x": rows[il]["x"], "r": rows[il]["r"]},
            "cells": rows, "skipped": skipped}


__all__ = [
    "PIReport", "CSReport", "CutoffFunction", "pi_constant", "pi_constant_sets", "pi_rayleigh",
    "build_cutoff", "linear_cutoff", "check_cutoff", "annulus_energy_form", "cs_verify",
    "cs_verify_sets", "cs_margin", "cs_psd_holds", "cs_witness_value", "annulus_cutoff",
    "annulus_gamma_fit", "energy_of_max_check", "cap_psi_report", "psi_value",
]
