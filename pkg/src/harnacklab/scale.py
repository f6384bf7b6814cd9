"""Scale function, chain metric and quasisymmetry diagnostics.

``Psi(x, r) = mu(B(x, r)) / Cap_{B(x, r)}(B(x, r/8))``.  Values between
sampled radii are interpolated linearly in ``(log r, log Psi)``; outside the
sampled range the nearest segment is extended.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csgraph

from .errors import ConstructionError, ParameterError
from .graph_core import DIST_TOL, WeightedGraph, check_metric_axioms
from .parallel import pmap
from .potential import capacity


@dataclass
class ScaleFunction:
    """Sampled ``Psi`` table with regularity constants.

    ``table`` has shape ``(len(centers), len(radii))``; entries of
    inadmissible cells are filled by interpolation and listed in
    ``inadmissible``.
    """

    centers: np.ndarray
    radii: np.ndarray
    table: np.ndarray
    singleton_inner: list = field(default_factory=list)
    inadmissible: list = field(default_factory=list)
    regularity: dict = field(default_factory=dict)
    inner_factor: float = 8.0

    def __post_init__(self):
        self._row = {int(x): i for i, x in enumerate(self.centers)}

    def row(self, x: int) -> np.ndarray:
        return self.table[self._row[int(x)]]

    def __call__(self, x, r):
        """Vectorized ``Psi(x, r)`` for arrays of centers and radii."""
        x = np.atleast_1d(np.asarray(x, dtype=np.int64))
        r = np.atleast_1d(np.asarray(r, dtype=float))
        x, r = np.broadcast_arrays(x, r)
        rows = np.array([self._row[int(v)] for v in np.unique(x)])
        lookup = dict(zip(np.unique(x).tolist(), rows.tolist()))
        ri = np.vectorize(lookup.__getitem__, otypes=[np.int64])(x) if x.size else x
        out = np.zeros(r.shape)
        pos = r > 0
        lt = np.log(self.table)
        lr = np.log(self.radii)
        q = np.log(r[pos])
        if len(lr) == 1:
            out[pos] = np.exp(lt[ri[pos], 0])
            return out
        idx = np.clip(np.searchsorted(lr, q) - 1, 0, len(lr) - 2)
        t = (q - lr[idx]) / (lr[idx + 1] - lr[idx])
        rp = ri[pos]
        out[pos] = np.exp(lt[rp, idx] + t * (lt[rp, idx + 1] - lt[rp, idx]))
        return out

    def exponent(self, x: int, radii=None) -> float:
        """Least-squares slope of ``log Psi(x, .)`` over the given (default all) radii."""
        radii = self.radii if radii is None else np.asarray(radii, dtype=float)
        vals = self(np.full(len(radii), x), radii)
        return float(np.polyfit(np.log(radii), np.log(vals), 1)[0])


def _loglinear(lx, ly, q):
    if len(lx) == 1:
        return np.full(q.shape, ly[0])
    idx = np.clip(np.searchsorted(lx, q) - 1, 0, len(lx) - 2)
    t = (q - lx[idx]) / (lx[idx + 1] - lx[idx])
    return ly[idx] + t * (ly[idx + 1] - ly[idx])


def psi_cell(g: WeightedGraph, mu, x: int, r: float, inner_factor: float = 8.0):
    """One ``Psi`` value; returns ``(value or None, singleton_inner)``."""
    ball = g.ball(x, r)
    if len(ball) == g.n:
        return None, False
    inner = g.ball(x, r / inner_factor)
    singleton = len(inner) <= 1
    if len(inner) == 0:
        inner = np.array([x])
    cap = capacity(g, inner, ball if len(ball) else np.array([x])).value
    return float(np.asarray(mu)[ball].sum() / cap), singleton


def scale_function(g: WeightedGraph, mu, centers, radii, inner_factor: float = 8.0) -> ScaleFunction:
    """Tabulate ``Psi`` and fit its regularity constants.

    Cells whose ball covers the graph are inadmissible; their values are
    interpolated from the admissible radii at the same center.
    """
    centers = np.asarray([int(c) for c in centers])
    radii = np.asarray(sorted(float(r) for r in radii))
    if np.any(radii <= 0):
        raise ParameterError("radii must be positive")
    cells = [(int(x), float(r)) for x in centers for r in radii]
    res = pmap(lambda c: psi_cell(g, mu, c[0], c[1], inner_factor), cells)
    table = np.full((len(centers), len(radii)), np.nan)
    singleton, bad = [], []
    for (x, r), (val, single) in zip(cells, res):
        i, j = np.flatnonzero(centers == x)[0], np.flatnonzero(radii == r)[0]
        if val is None:
            bad.append((x, r))
        else:
            table[i, j] = val
            if single:
                singleton.append((x, r))
    lr = np.log(radii)
    for i in range(len(centers)):
        ok = np.isfinite(table[i])
        if not np.any(ok):
            raise ParameterError(f"no admissible radius at center {centers[i]}")
        if not np.all(ok):
            table[i, ~ok] = np.exp(_loglinear(lr[ok], np.log(table[i, ok]), lr[~ok]))
    sf = ScaleFunction(centers, radii, table, singleton, bad, {}, inner_factor)
    sf.regularity = psi_regularity(g, sf)
    return sf


def psi_regularity(g: WeightedGraph, sf: ScaleFunction) -> dict:
    """Constants ``(C1, beta1, beta2)`` dominating every sampled pair.

    For cells ``(x, r)``, ``(y, s)`` with ``s <= r`` and ``R = d(x, y)``, the
    two-sided bound is
    ``C1^-1 (r/(R v r))^b2 ((R v r)/s)^b1 <= Psi(x,r)/Psi(y,s) <= C1 (r/(R v r))^b1 ((R v r)/s)^b2``.
    ``beta1``/``beta2`` are least-squares slopes of the smallest/largest
    same-center log ratios against ``log(r/s)``; ``C1`` is the worst
    violation factor at those exponents.
    """
    increasing = bool(np.all(np.diff(sf.table, axis=1) > 0))
    lr = np.log(sf.radii)
    lt = np.log(sf.table)
    by_t: dict = {}
    for j in range(len(sf.radii)):
        for i in range(j + 1, len(sf.radii)):
            vals = lt[:, i] - lt[:, j]
            by_t.setdefault(round(lr[i] - lr[j], 12), []).extend(vals.tolist())
    if not by_t:
        return {"C1": 1.0, "beta1": None, "beta2": None, "increasing": increasing}
    ts = np.array(sorted(by_t))
    lo = np.array([min(by_t[t]) for t in ts])
    hi = np.array([max(by_t[t]) for t in ts])
    beta1 = float(lo @ ts / (ts @ ts))
    beta2 = max(beta1, float(hi @ ts / (ts @ ts)))
    # all pairs of cells
    X = np.repeat(sf.centers, len(sf.radii))
    Rr = np.tile(sf.radii, len(sf.centers))
    L = lt.ravel()
    dist = np.array([g.distances_from(x)[sf.centers] for x in sf.centers])
    ci = np.repeat(np.arange(len(sf.centers)), len(sf.radii))
    Rd = dist[np.ix_(ci, ci)]
    r = Rr[:, None]
    s = Rr[None, :]
    valid = s <= r + DIST_TOL
    big = np.maximum(Rd, r)
    u = np.log(r / big)
    v = np.log(big / s)
    ratio = L[:, None] - L[None, :]
    lower = beta2 * u + beta1 * v
    upper = beta1 * u + beta2 * v
    viol = np.where(valid, np.maximum(lower - ratio, ratio - upper), -np.inf)
    k = np.unravel_index(np.argmax(viol), viol.shape)
    C1 = float(np.exp(max(0.0, viol[k])))
    return {"C1": C1, "beta1": beta1, "beta2": beta2, "increasing": increasing,
            "witness": {"x": int(X[k[0]]), "r": float(Rr[k[0]]), "y": int(X[k[1]]), "s": float(Rr[k[1]])}}


@dataclass
class ChainMetric:
    D: np.ndarray
    d_psi: np.ndarray
    K: float
    eps: float
    beta: float
    halvings: int
    lower_ratio: float
    power_comparison_C: float
    power_comparison_witness: dict
    K_exact: bool


def quasi_metric(g: WeightedGraph, psi) -> np.ndarray:
    """``D(x, y) = Psi(x, d(x,y)) + Psi(y, d(x,y))`` on all pairs."""
    n = g.n
    dist = g.distance_matrix
    X = np.repeat(np.arange(n), n)
    Dd = dist.ravel()
    P = np.array(psi(X, Dd), dtype=float).reshape(n, n)
    P[dist == 0] = 0.0
    return P + P.T


def quasi_triangle_constant(D: np.ndarray, sample: int | None = None, seed: int = 0) -> tuple[float, bool]:
    """Smallest ``K`` with ``D(x,y) <= K (D(x,z) + D(z,y))`` over all (or sampled) ``z``."""
    n = len(D)
    zs = range(n)
    exact = True
    if sample is not None and n > sample:
        zs = np.random.Generator(np.random.Philox(seed)).choice(n, sample, replace=False)
        exact = False
    K = 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        for z in zs:
            denom = D[:, [z]] + D[[z], :]
            ratio = np.where(denom > 0, D / denom, 0.0)
            K = max(K, float(ratio.max()))
    return K, exact


def build_chain_metric(g: WeightedGraph, psi, max_halvings: int = 6, exact_limit: int = 500) -> ChainMetric:
    """Snowflake-and-chain metric ``d_Psi`` with exponent ``beta = 1/eps``.

    ``eps = min(1, log 2 / log(2K))``; ``d_Psi`` is the shortest-path metric
    of the complete graph with costs ``D^eps``.  If some pair has
    ``d_Psi < D^eps / 4``, ``eps`` is halved (at most ``max_halvings`` times).
    """
    D = quasi_metric(g, psi)
    K, exact = quasi_triangle_constant(D, None if g.n <= exact_limit else exact_limit)
    eps = min(1.0, math.log(2) / math.log(2 * K))
    off = ~np.eye(g.n, dtype=bool)
    for halving in range(max_halvings + 1):
        cost = D ** eps
        dpsi = csgraph.shortest_path(cost, method="FW", directed=False)
        lower = np.where(off, dpsi / np.where(off, cost, 1.0), np.inf)
        worst = float(lower.min()) if g.n > 1 else 1.0
        if worst >= 0.25 - 1e-12:
            break
        if halving == max_halvings:
            i, j = np.unravel_index(np.argmin(lower), lower.shape)
            raise ConstructionError("chain lower bound failed after halving",
                                    {"pair": [int(i), int(j)], "ratio": worst, "eps": eps})
        eps /= 2
    beta = 1.0 / eps
    dist = g.distance_matrix
    X = np.repeat(np.arange(g.n), g.n)
    P = np.array(psi(X, dist.ravel()), dtype=float).reshape(g.n, g.n)
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(off, dpsi ** beta / P, 1.0)
        both = np.where(off, np.maximum(q, 1.0 / q), 1.0)
    k = np.unravel_index(np.argmax(both), both.shape)
    return ChainMetric(D, dpsi, K, eps, beta, halving, worst, float(both[k]),
                       {"x": int(k[0]), "y": int(k[1]), "ratio": float(q[k])}, exact)


def chain_metric_checks(cm: ChainMetric) -> dict:
    ax = check_metric_axioms(cm.d_psi)
    return {"metric": ax["ok"], "lower_bound": cm.lower_ratio >= 0.25 - 1e-12,
            "upper_bound": bool(np.all(cm.d_psi <= cm.D ** cm.eps * (1 + 1e-12) + 1e-15))}


def quasisymmetry_distortion(d1: np.ndarray, d2: np.ndarray, max_vertices: int = 200,
                             seed: int = 0) -> dict:
    """Envelope ``eta(t) = C max(t^gamma1, t^gamma2)`` dominating all ratio pairs.

    For triples ``(x, a, b)`` with ``x`` distinct from ``a`` and ``b``:
    ``t = d1(x,a)/d1(x,b)`` and ``s = d2(x,a)/d2(x,b)``.  ``gamma1`` is the
    least-squares slope through the origin of ``log s`` against ``log t`` for
    ``t < 1`` and ``gamma2`` the same for ``t > 1``; ``C`` is the smallest
    constant with ``s <= C eta0(t)`` on every triple.  All base points are
    used up to ``max_vertices``, otherwise a seeded subsample (flagged).
    """
    d1 = np.asarray(d1, dtype=float)
    d2 = np.asarray(d2, dtype=float)
    n = len(d1)
    xs = np.arange(n)
    exhaustive = n <= max_vertices
    if not exhaustive:
        xs = np.sort(np.random.Generator(np.random.Philox(seed)).choice(n, max_vertices, replace=False))
    lt_all, ls_all = [], []
    for x in xs:
        mask = np.arange(n) != x
        a1, a2 = d1[x, mask], d2[x, mask]
        lt = np.log(a1)[:, None] - np.log(a1)[None, :]
        ls = np.log(a2)[:, None] - np.log(a2)[None, :]
        lt_all.append(lt.ravel())
        ls_all.append(ls.ravel())
    lt = np.concatenate(lt_all)
    ls = np.concatenate(ls_all)
    small, large = lt < -1e-12, lt > 1e-12
    g1 = float(ls[small] @ lt[small] / (lt[small] @ lt[small])) if np.any(small) else 1.0
    g2 = float(ls[large] @ lt[large] / (lt[large] @ lt[large])) if np.any(large) else 1.0
    base = np.where(lt < 0, g1 * lt, g2 * lt)
    slack = ls - base
    C = float(np.exp(slack.max()))
    return {"C": C, "gamma1": g1, "gamma2": g2, "triples": int(len(lt)), "exhaustive": exhaustive}


def eta(envelope: dict, t: float) -> float:
    g = envelope["gamma1"] if t < 1 else envelope["gamma2"]
    return envelope["C"] * t ** g


def annuli_comparison(d1: np.ndarray, d2: np.ndarray, x: int, r: float, A: float,
                      envelope: dict | None = None) -> dict:
    """Largest ``s`` with ``B2(x,s) in B1(x,r)`` and the factor needed for ``B1(x,Ar) in B2(x, eta s)``.

    ``eta_needed`` is the ratio of the largest ``d2`` over ``B1(x, Ar)`` to
    ``s``; the chain holds for any ``eta(A) > eta_needed``.  With an
    envelope the certificate compares against ``eta(A)``.
    """
    row1, row2 = np.asarray(d1)[x], np.asarray(d2)[x]
    outside = row1 >= r - DIST_TOL
    s = float(row2[outside].min()) if np.any(outside) else math.inf
    big = row1 < A * r - DIST_TOL
    far = float(row2[big].max())
    needed = far / s if math.isfinite(s) and s > 0 else math.inf
    out = {"x": int(x), "r": float(r), "A": float(A), "s": s, "eta_needed": needed,
           "inner_ok": bool(np.all(row1[row2 < s - DIST_TOL] < r - DIST_TOL))}
    if envelope is not None:
        out["eta_A"] = eta(envelope, A)
        out["certified"] = out["eta_A"] > needed
    return out


def annuli_comparison_dual(d1, d2, x, r, A, envelope=None) -> dict:
    """Same chain with the roles of the two metrics exchanged."""
    return annuli_comparison(d2, d1, x, r, A, envelope)
