"""Capacities, equilibrium potentials, Green-function comparisons.

Radial Green values are taken over distance bands: ``g_D(x, r)`` is the
minimum of ``g_D(x, .)`` over ``{y in D : r <= d(x, y) < r + l_max}``.  On a
unit-length graph with integer ``r`` this is the exact sphere.  For
``0 <= r < l_min`` no vertex other than ``x`` lies within ``r`` and the band
is ``{x}`` itself.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.sparse import csgraph

from .dirichlet import DomainProblem, energy, neumann_laplacian, solve_dirichlet
from .errors import (ConstructionError, ContainmentError, HarnackLabError, OverlapError,
                     ParameterError, ShellError, TopologyError)
from .graph_core import DIST_TOL, WeightedGraph, as_index_array

IDENTITY_TOL = 1e-10


@dataclass(frozen=True)
class CapacityResult:
    """Equilibrium data for ``A`` inside ``D``.

    ``h`` and ``nu`` are full-length vertex vectors; ``h`` vanishes off ``D``
    and ``nu`` is supported on ``A``.
    """

    A: np.ndarray
    D: np.ndarray
    value: float
    h: np.ndarray
    nu: np.ndarray
    residual: float


def _check_pair(g: WeightedGraph, A, D):
    A = as_index_array(A)
    D = as_index_array(D)
    if len(A) == 0 or len(D) == 0:
        raise ParameterError("A and D must be nonempty")
    if not np.all(np.isin(A, D)):
        raise ContainmentError("A is not contained in D")
    if len(g.boundary(D)) == 0:
        raise TopologyError("D has empty boundary")
    return A, D


def capacity(g: WeightedGraph, A, D) -> CapacityResult:
    """``Cap_D(A)`` with its equilibrium potential and measure.

    ``h`` is harmonic on ``D \\ A``, equal to 1 on ``A`` and 0 off ``D``;
    ``nu = (L h)|_A``.  Raises ``HarnackLabError`` if ``E(h,h)`` and the
    total mass of ``nu`` disagree beyond 1e-10 relative.
    """
    A, D = _check_pair(g, A, D)
    free = np.setdiff1d(D, A)
    h = np.zeros(g.n)
    h[A] = 1.0
    residual = 0.0
    if len(free):
        dp = DomainProblem(g, free)
        sol, residual = solve_dirichlet(dp, h, return_residual=True)
        h[free] = sol[free]
    lh = g.laplacian @ h
    nu = np.zeros(g.n)
    nu[A] = lh[A]
    value = energy(g, h)
    if abs(value - nu.sum()) > IDENTITY_TOL * max(1.0, value):
        raise HarnackLabError(f"capacity identity failed: E(h,h)={value}, nu total={nu.sum()}")
    return CapacityResult(A, D, value, h, nu, residual)


def capacity_value(g: WeightedGraph, A, D) -> float:
    return capacity(g, A, D).value


def hitting_probability(g: WeightedGraph, A, D) -> np.ndarray:
    """``P^x(T_A < tau_D)`` from the random-walk transition matrix.

    Solves ``(I - P_UU) h_U = P_UA 1`` with ``P = diag(w)^{-1} W`` and
    ``U = D \\ A``; independent of the Laplacian route in :func:`capacity`.
    """
    A, D = _check_pair(g, A, D)
    free = np.setdiff1d(D, A)
    h = np.zeros(g.n)
    h[A] = 1.0
    if len(free):
        P = sp.diags(1.0 / g.vertex_weight) @ g.adjacency
        P = P.tocsr()
        M = sp.identity(len(free), format="csc") - P[free][:, free].tocsc()
        rhs = np.asarray(P[free][:, A].sum(axis=1)).ravel()
        h[free] = spla.spsolve(M, rhs)
    return h


def _band(g: WeightedGraph, x: int, r: float, within=None) -> np.ndarray:
    d = g.distances_from(x)
    if r < g.min_length - DIST_TOL:
        band = np.array([x])
    else:
        band = np.flatnonzero((d >= r - DIST_TOL) & (d < r + g.max_length - DIST_TOL))
    if within is not None:
        band = band[np.isin(band, within)]
    return band


def green_radial(dp: DomainProblem, x: int, r: float, column=None) -> float:
    """``g_D(x, r)``: minimum of ``g_D(x, .)`` over the distance band at ``r``."""
    band = _band(dp.graph, x, r, dp.domain)
    if len(band) == 0:
        raise ShellError(f"no vertex of D in the distance band at r={r} around {x}")
    col = dp.green_column(x) if column is None else column
    return float(col[dp.position[band]].min())


def green_radial_profile(dp: DomainProblem, x: int, radii) -> np.ndarray:
    col = dp.green_column(x)
    return np.array([green_radial(dp, x, r, col) for r in radii])


def _require_inside(g: WeightedGraph, x0: int, radius: float, D) -> None:
    ball = g.ball(x0, radius)
    if not np.all(np.isin(ball, D)):
        raise ContainmentError(f"B({x0}, {radius}) is not contained in D")


def cap_green_duality_report(g: WeightedGraph, x0: int, r: float, D, K: float = 2.0) -> dict:
    """``g_D(x0, r) <= Cap_D(B(x0, r))^{-1} <= C_G g_D(x0, r)`` with observed ``C_G``.

    The left inequality is asserted; ``C_G_observed = mid / lhs``.
    """
    D = as_index_array(D)
    _require_inside(g, x0, K * r, D)
    dp = DomainProblem(g, D)
    inner = g.ball(x0, r) if r >= g.min_length - DIST_TOL else np.array([x0])
    if len(inner) == 0:
        inner = np.array([x0])
    lhs = green_radial(dp, x0, r)
    cap = capacity(g, inner, D).value
    mid = 1.0 / cap
    if lhs > mid * (1 + 1e-10):
        raise ConstructionError("Green lower bound violated", {"x0": int(x0), "r": r, "lhs": lhs, "mid": mid})
    return {"x0": int(x0), "r": float(r), "K": float(K), "lhs": lhs, "mid": mid,
            "capacity": cap, "C_G_observed": mid / lhs}


def green_comparison_report(g: WeightedGraph, D, x0: int, R: float, A: float = 2.0,
                            K: float = 2.0) -> dict:
    """Observed comparability constants for ``g_D`` around ``x0`` at scale ``R``.

    * ``shell_ratio``: max/min of ``g_D(x0, .)`` over the band at ``R``;
    * ``annulus_ratio``: max/min over ``B(x0, R) \\ B(x0, R/A)``;
    * ``cross_ratio``: max/min of ``g_D(x, y)`` over ``x, y`` in ``B(x0, R)``
      with ``d(x, y) >= R/4``.
    """
    D = as_index_array(D)
    _require_inside(g, x0, K * R, D)
    dp = DomainProblem(g, D)
    col = dp.green_column(x0)
    band = _band(g, x0, R, D)
    if len(band) == 0:
        raise ShellError("empty shell")
    d = g.distances_from(x0)
    ball = g.ball(x0, R)
    annulus = ball[d[ball] >= R / A - DIST_TOL]
    if len(annulus) == 0:
        raise ShellError("empty annulus")

    def ratio(vals):
        i, j = int(np.argmax(vals)), int(np.argmin(vals))
        return float(vals[i] / vals[j]), i, j

    shell_vals = col[dp.position[band]]
    s_ratio, si, sj = ratio(shell_vals)
    ann_vals = col[dp.position[annulus]]
    a_ratio, ai, aj = ratio(ann_vals)
    # cross pairs only need the block of the kernel on B(x0, R)
    rhs = np.zeros((dp.size, len(ball)))
    rhs[dp.position[ball], np.arange(len(ball))] = 1.0
    block = dp.solve(rhs)[dp.position[ball]]
    dist = np.array([g.distances_from(v)[ball] for v in ball])
    mask = dist >= R / 4 - DIST_TOL
    cross = None
    if np.any(mask):
        vals = np.where(mask, block, np.nan)
        hi = np.unravel_index(np.nanargmax(vals), vals.shape)
        lo = np.unravel_index(np.nanargmin(vals), vals.shape)
        cross = {"ratio": float(vals[hi] / vals[lo]),
                 "max_pair": [int(ball[hi[0]]), int(ball[hi[1]])],
                 "min_pair": [int(ball[lo[0]]), int(ball[lo[1]])]}
    return {
        "x0": int(x0), "R": float(R), "A": float(A),
        "shell_ratio": s_ratio, "shell_witness": [int(band[si]), int(band[sj])],
        "annulus_ratio": a_ratio, "annulus_witness": [int(annulus[ai]), int(annulus[aj])],
        "cross": cross,
    }


def fit_loglog(x, y) -> dict:
    """Least-squares slope and intercept of ``log y`` against ``log x``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 3:
        raise ParameterError("at least 3 points are needed for a fit")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ParameterError("log-log fit needs positive data")
    lx, ly = np.log(x), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    return {"slope": float(slope), "intercept": float(intercept),
            "residual": float(np.sqrt(np.mean(resid ** 2)))}


def green_growth_exponent(dp: DomainProblem, x: int, radii) -> dict:
    """Fit ``log g_D(x, r)`` against ``log r`` (diagnostic)."""
    radii = [float(r) for r in radii]
    if len(radii) < 3:
        raise ParameterError("at least 3 radii are needed")
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ParameterError("radii must be increasing")
    _require_inside(dp.graph, x, 2 * radii[-1], dp.domain)
    values = green_radial_profile(dp, x, radii)
    fit = fit_loglog(radii, values)
    fit.update({"radii": radii, "values": values.tolist()})
    return fit


def domain_comparison_report(g: WeightedGraph, x0: int, R: float, A: float = 4.0) -> dict:
    """Observed constants comparing Green kernels and capacities of nested balls.

    ``green_ratio`` is the sup over ``x, y`` in ``B(x0, R/4)`` of
    ``g_{B(x0,2R)}(x, y) / g_{B(x0,R)}(x, y)``.  ``cap_ratio`` is
    ``Cap_{B(x0,Ar)}(B(x0,r)) / Cap_{B(x0,2Ar)}(B(x0,r))`` at ``r = R/A``;
    it is at least 1 by monotonicity, which is asserted.
    """
    big = g.ball(x0, 2 * R)
    if len(big) == g.n:
        raise ContainmentError("B(x0, 2R) is the whole graph")
    small = g.ball(x0, R)
    inner = g.ball(x0, R / 4)
    if len(inner) == 0:
        inner = np.array([x0])
    dp1, dp2 = DomainProblem(g, small), DomainProblem(g, big)
    rhs1 = np.zeros((dp1.size, len(inner)))
    rhs1[dp1.position[inner], np.arange(len(inner))] = 1.0
    rhs2 = np.zeros((dp2.size, len(inner)))
    rhs2[dp2.position[inner], np.arange(len(inner))] = 1.0
    g1 = dp1.solve(rhs1)[dp1.position[inner]].reshape(len(inner), len(inner))
    g2 = dp2.solve(rhs2)[dp2.position[inner]].reshape(len(inner), len(inner))
    ratios = g2 / g1
    i, j = np.unravel_index(np.argmax(ratios), ratios.shape)
    r = R / A
    ball_r = g.ball(x0, r)
    if len(ball_r) == 0:
        ball_r = np.array([x0])
    cap_near = capacity(g, ball_r, g.ball(x0, A * r)).value
    cap_far = capacity(g, ball_r, big).value
    if cap_far > cap_near * (1 + 1e-12):
        raise ConstructionError("capacity monotonicity violated", {"near": cap_near, "far": cap_far})
    return {"x0": int(x0), "R": float(R), "A": float(A),
            "green_ratio": float(ratios[i, j]), "green_witness": [int(inner[i]), int(inner[j])],
            "cap_ratio": cap_near / cap_far, "cap_near": cap_near, "cap_far": cap_far}


def enhanced_subadditivity_check(g: WeightedGraph, D, parts, centers, b: float = 4.0,
                                 x0: int | None = None, R: float | None = None,
                                 containment: float = 8.0) -> dict:
    """``delta = 1 - Cap_D(F) / sum_i Cap_D(Q_i)`` for a partition of ``F``.

    Preconditions (each raises its own error): at least two disjoint parts,
    ``F`` inside ``B(x0, R)``, ``B(x0, containment * R)`` inside ``D``, and
    ``B(z_i, R / (6 b))`` inside ``Q_i``.  When ``x0``/``R`` are omitted the
    geometric conditions are skipped.  ``delta > 0`` is asserted.
    """
    D = as_index_array(D)
    parts = [as_index_array(q) for q in parts]
    if len(parts) < 2:
        raise ParameterError("need at least two parts")
    if len(centers) != len(parts):
        raise ParameterError("one center per part")
    F = np.concatenate(parts)
    if len(np.unique(F)) != len(F):
        raise OverlapError("parts are not disjoint")
    F = np.sort(F)
    if x0 is not None and R is not None:
        if not np.all(np.isin(F, g.ball(x0, R))):
            raise ContainmentError("F is not inside B(x0, R)")
        _require_inside(g, x0, containment * R, D)
        for q, z in zip(parts, centers):
            if not np.all(np.isin(g.ball(z, R / (6 * b)), q)) or z not in set(q.tolist()):
                raise ContainmentError(f"inner ball around {z} is not inside its part")
    caps = [capacity(g, q, D).value for q in parts]
    cap_f = capacity(g, F, D).value
    delta = 1.0 - cap_f / sum(caps)
    if delta <= 0:
        raise ConstructionError("no subadditivity gain", {"cap_F": cap_f, "caps": caps})
    return {"delta": delta, "cap_F": cap_f, "cap_parts": caps, "n_parts": len(parts)}


def neumann_capacity(g: WeightedGraph, A1, A2, D) -> float:
    """Effective conductance between ``A1`` and ``A2`` in the subgraph induced on ``D``."""
    A1, A2, D = as_index_array(A1), as_index_array(A2), as_index_array(D)
    if len(A1) == 0 or len(A2) == 0:
        raise ParameterError("A1 and A2 must be nonempty")
    if np.intersect1d(A1, A2).size:
        raise OverlapError("A1 and A2 overlap")
    if not (np.all(np.isin(A1, D)) and np.all(np.isin(A2, D))):
        raise ContainmentError("A1 and A2 must lie in D")
    L = neumann_laplacian(g, D).tocsr()
    pos = np.full(g.n, -1, dtype=np.int64)
    pos[D] = np.arange(len(D))
    f = np.full(len(D), np.nan)
    f[pos[A1]] = 1.0
    f[pos[A2]] = 0.0
    ncomp, labels = csgraph.connected_components(-L + sp.diags(L.diagonal()), directed=False)
    fixed = ~np.isnan(f)
    for c in range(ncomp):
        comp = labels == c
        free = comp & ~fixed
        if not np.any(free):
            continue
        if not np.any(comp & fixed):
            f[free] = 0.0
            continue
        fi, xi = np.flatnonzero(free), np.flatnonzero(comp & fixed)
        rhs = -(L[fi][:, xi] @ f[xi])
        f[fi] = spla.spsolve(L[fi][:, fi].tocsc(), rhs) if len(fi) > 1 else rhs / L[fi[0], fi[0]]
    return float(f @ (L @ f))
