"""Net discretization, restriction and extension maps, rough isometries, dumbbells.

A maximal ``eps``-separated net becomes a weighted graph with ``u ~ v`` iff
``d(u,v) <= 3 eps`` and ``w_uv = m(B(u,eps)) + m(B(v,eps))``.  Functions are
moved between the graph and its net by ball averages (``rst``) and a tent
partition of unity (``ext``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from .dirichlet import check_measure, energy, neumann_laplacian
from .errors import ConstructionError, ParameterError
from .graph_core import DIST_TOL, WeightedGraph, epsilon_net
from .parallel import pmap
from .sampling import make_rng


@dataclass
class NetDiscretization:
    """Net graph with its maps.

    ``rst`` has shape ``(len(net), n)`` and ``ext`` shape ``(n, len(net))``;
    ``net_measure[i] = m(B(net[i], eps))``.
    """

    graph: WeightedGraph
    net: np.ndarray
    net_graph: WeightedGraph
    eps: float
    rst: sp.csr_matrix
    ext: sp.csr_matrix
    net_measure: np.ndarray
    partition: dict
    trivial: bool

    def restrict(self, f) -> np.ndarray:
        return self.rst @ np.asarray(f, dtype=float)

    def extend(self, h) -> np.ndarray:
        return self.ext @ np.asarray(h, dtype=float)


def _net_graph(g: WeightedGraph, net: np.ndarray, eps: float, masses: np.ndarray) -> WeightedGraph:
    dist = np.array([g.distances_from(v)[net] for v in net])
    iu, ju = np.triu_indices(len(net), 1)
    keep = dist[iu, ju] <= 3 * eps + DIST_TOL
    iu, ju = iu[keep], ju[keep]
    edges = np.column_stack([iu, ju]).astype(np.int64)
    weights = masses[iu] + masses[ju]
    lengths = dist[iu, ju]
    labels = [g.labels[v] if g.labels else str(int(v)) for v in net]
    root = int(np.flatnonzero(net == g.root)[0]) if g.root in net else 0
    adj = sp.coo_matrix((np.ones(len(iu)), (iu, ju)), shape=(len(net), len(net)))
    if len(net) > 1 and csgraph.connected_components(adj, directed=False)[0] != 1:
        raise ConstructionError("net graph is disconnected", {"eps": eps, "net_size": int(len(net))})
    return WeightedGraph(len(net), edges, weights, lengths, root, labels)


def _partition(g: WeightedGraph, m: np.ndarray, net: np.ndarray, eps: float, masses: np.ndarray):
    dist = np.array([g.distances_from(v) for v in net])
    tents = np.maximum(0.0, 1.0 - dist / (2 * eps))
    total = tents.sum(axis=0)
    if np.any(total <= 0):
        raise ConstructionError("net does not cover the graph", {"vertex": int(np.argmin(total))})
    chi = tents / total
    c_low, c_wit = math.inf, None
    C_up, C_wit = 0.0, None
    support_ok = True
    for i, v in enumerate(net):
        half = dist[i] < eps / 2 - DIST_TOL
        lo = float(chi[i, half].min())
        if lo < c_low:
            c_low, c_wit = lo, int(v)
        support_ok &= bool(np.all(chi[i, dist[i] >= 2 * eps - DIST_TOL] == 0))
        ratio = energy(g, chi[i]) / masses[i]
        if ratio > C_up:
            C_up, C_wit = float(ratio), int(v)
    props = {
        "sum_to_one": float(np.abs(chi.sum(axis=0) - 1).max()),
        "c": c_low, "c_witness": c_wit,
        "support_in_2eps": support_ok,
        "C": C_up, "C_witness": C_wit,
        "nonnegative": bool(np.all(chi >= 0)),
    }
    props["ok"] = props["sum_to_one"] <= 1e-12 and c_low > 0 and support_ok and props["nonnegative"]
    return chi, props


def discretize(g: WeightedGraph, m, eps: float) -> NetDiscretization:
    """Net graph, ``rst`` (ball averages) and ``ext`` (tent partition of unity).

    For ``eps`` below the shortest edge the net is every vertex and both
    maps are the identity (flagged ``trivial``).
    """
    m = check_measure(g, m)
    if eps <= 0:
        raise ParameterError("eps must be positive")
    if eps < g.min_length - DIST_TOL:
        net = np.arange(g.n)
        eye = sp.identity(g.n, format="csr")
        props = {"sum_to_one": 0.0, "c": 1.0, "c_witness": None, "support_in_2eps": True,
                 "C": float((g.vertex_weight / m).max()), "C_witness": int(np.argmax(g.vertex_weight / m)),
                 "nonnegative": True, "ok": True}
        return NetDiscretization(g, net, g, eps, eye, eye.copy(), m.copy(), props, True)
    net = epsilon_net(g, eps)
    balls = [g.ball(v, eps) for v in net]
    masses = np.array([m[b].sum() for b in balls])
    ng = _net_graph(g, net, eps, masses)
    rows = np.concatenate([np.full(len(b), i) for i, b in enumerate(balls)])
    cols = np.concatenate(balls)
    vals = np.concatenate([m[b] / masses[i] for i, b in enumerate(balls)])
    rst = sp.csr_matrix((vals, (rows, cols)), shape=(len(net), g.n))
    chi, props = _partition(g, m, net, eps, masses)
    ext = sp.csr_matrix(chi.T)
    return NetDiscretization(g, net, ng, eps, rst, ext, masses, props, False)


def nearest_net_map(disc: NetDiscretization) -> np.ndarray:
    """Index (in the net graph) of the nearest net point of every vertex; ties by net order."""
    dist = np.array([disc.graph.distances_from(v) for v in disc.net])
    return np.argmin(dist, axis=0)


def rough_isometry_check(phi, g1: WeightedGraph, m1, g2: WeightedGraph, m2, C1: float) -> dict:
    """Smallest ``C2``, ``C3`` for the rough-isometry inequalities at covering radius ``C1``.

    Covering: every vertex of ``g2`` lies in some ``B2(phi(x), C1)``.
    Distances: ``C2^-1 (d1 - C1) <= d2(phi x, phi y) <= C2 (d1 + C1)``.
    Measures: ``C3^-1 m1(B1(x,C1)) <= m2(B2(phi x, C1)) <= C3 m1(B1(x,C1))``.
    Both constants are at least 1.
    """
    phi = np.asarray(phi, dtype=np.int64)
    if phi.shape != (g1.n,) or phi.min() < 0 or phi.max() >= g2.n:
        raise ParameterError("phi must map every vertex of g1 into g2")
    m1, m2 = check_measure(g1, m1), check_measure(g2, m2)
    d1 = g1.distance_matrix
    d2 = g2.distance_matrix[np.ix_(phi, phi)]
    image = np.unique(phi)
    near = g2.distance_matrix[image].min(axis=0)
    uncovered = np.flatnonzero(near >= C1 - DIST_TOL)
    out = {"C1": float(C1), "covering": len(uncovered) == 0,
           "covering_witness": int(uncovered[0]) if len(uncovered) else None}
    with np.errstate(divide="ignore", invalid="ignore"):
        upper = d2 / (d1 + C1)
        lower = np.where(d1 > C1, (d1 - C1) / d2, 0.0)
    k_up = np.unravel_index(np.argmax(upper), upper.shape)
    k_lo = np.unravel_index(np.argmax(lower), lower.shape)
    C2 = max(1.0, float(upper[k_up]), float(lower[k_lo]))
    wit = k_up if upper[k_up] >= lower[k_lo] else k_lo
    out.update(C2=C2, C2_witness={"x": int(wit[0]), "y": int(wit[1])})
    b1 = np.array([m1[g1.ball(x, C1)].sum() for x in range(g1.n)])
    b2 = np.array([m2[g2.ball(int(phi[x]), C1)].sum() for x in range(g1.n)])
    q = np.maximum(b2 / b1, b1 / b2)
    i = int(np.argmax(q))
    out.update(C3=max(1.0, float(q[i])), C3_witness={"x": i})
    out["ok"] = out["covering"] and math.isfinite(C2)
    return out


def _two_sided(num, den):
    ok = (den > 1e-14) & (num > 1e-14)
    if not np.any(ok):
        return {"lower": None, "upper": None, "samples": 0}
    r = num[ok] / den[ok]
    return {"lower": float(r.min()), "upper": float(r.max()), "samples": int(ok.sum())}


def transfer_inequality_experiment(g: WeightedGraph, m, eps: float, center: int, radius: float,
                                   samples: int = 50, seed: int = 0) -> dict:
    """Compare energies and ball norms across the ``rst``/``ext`` maps.

    Graph functions: random normals, distance from ``center`` and a constant.
    Net functions: random normals and a constant.  Each comparison reports
    the range of the ratio (net side over graph side for ``rst``, graph side
    over net side for ``ext``) over samples with nonzero values.
    """
    m = check_measure(g, m)
    disc = discretize(g, m, eps)
    ng = disc.net_graph
    rng = make_rng(seed, 1)
    fs = [rng.standard_normal(g.n) for _ in range(samples)]
    fs += [g.distances_from(center).copy(), np.ones(g.n)]
    ball = g.ball(center, radius)
    nball = np.flatnonzero(np.isin(disc.net, ball))
    e_g, e_n, n_g, n_n = [], [], [], []
    for f in fs:
        rf = disc.restrict(f)
        e_g.append(energy(g, f))
        e_n.append(energy(ng, rf))
        n_g.append(float(m[ball] @ f[ball] ** 2))
        n_n.append(float(disc.net_measure[nball] @ rf[nball] ** 2))
    hs = [rng.standard_normal(len(disc.net)) for _ in range(samples)] + [np.ones(len(disc.net))]
    x_g, x_n, rr = [], [], []
    for h in hs:
        eh = disc.extend(h)
        x_n.append(energy(ng, h))
        x_g.append(energy(g, eh))
        rr.append(energy(ng, disc.restrict(eh)))
    e_g, e_n, n_g, n_n = map(np.array, (e_g, e_n, n_g, n_n))
    x_g, x_n, rr = map(np.array, (x_g, x_n, rr))
    return {"eps": float(eps), "net_size": int(len(disc.net)), "trivial": disc.trivial,
            "rst_energy": _two_sided(e_n, e_g), "rst_norm": _two_sided(n_n, n_g),
            "ext_energy": _two_sided(x_g, x_n), "rst_ext_energy": _two_sided(rr, x_n),
            "constant_energies": [float(e_g[-1]), float(e_n[-1]), float(x_g[-1]), float(x_n[-1])],
            "partition": disc.partition}


# ---------------------------------------------------------------------------
# dumbbell condition
# ---------------------------------------------------------------------------

def neumann_green(g: WeightedGraph, D: np.ndarray) -> np.ndarray:
    """Pseudo-inverse of the induced-subgraph Laplacian on ``D`` (connected)."""
    L = neumann_laplacian(g, D).toarray()
    k = len(D)
    J = np.full((k, k), 1.0 / k)
    return np.linalg.inv(L + J) - J


def _set_conductances(G: np.ndarray, sets1: list, sets2: list) -> np.ndarray:
    """Effective conductance between index sets via Kron reduction of ``G``.

    The Schur complement of the Laplacian onto ``T = A1 u A2`` is the
    pseudo-inverse of the doubly centered block ``G[T, T]``; the
    conductance is the sum of its ``A1 x A1`` block.
    """
    out = np.empty(len(sets1))
    groups: dict = {}
    for idx, (a1, a2) in enumerate(zip(sets1, sets2)):
        groups.setdefault((len(a1), len(a2)), []).append(idx)
    for (k1, k2), idxs in groups.items():
        k = k1 + k2
        T = np.array([np.concatenate([sets1[i], sets2[i]]) for i in idxs])
        blocks = G[T[:, :, None], T[:, None, :]]
        P = np.eye(k) - 1.0 / k
        cen = P @ blocks @ P
        vals, vecs = np.linalg.eigh(cen)
        top = vals.max(axis=1, keepdims=True)
        inv = np.where(vals > 1e-12 * top, 1.0 / np.where(vals > 0, vals, 1.0), 0.0)
        S = np.einsum("bik,bk,bjk->bij", vecs[:, :k1, :], inv, vecs[:, :k1, :])
        out[idxs] = S.sum(axis=(1, 2))
    return out


def dumbbell_report(g: WeightedGraph, x0: int, R: float, chunk: int = 20000) -> dict:
    """Extremes of ``C_eff(B(x,R/8), B(y,R/8); B(x0,R))`` over well-separated pairs.

    Pairs range over ``x, y`` in ``B(x0, R/2)`` with ``d(x,y) >= R/3``; the
    form on ``B(x0,R)`` is that of the induced subgraph.
    """
    if R < 8:
        raise ParameterError("R must be at least 8")
    D = g.ball(x0, R)
    half = g.ball(x0, R / 2)
    dist = g.distance_matrix if g.n <= 2000 else np.array([g.distances_from(v) for v in half])
    sub = dist[np.ix_(half, half)] if g.n <= 2000 else dist[:, half]
    iu, ju = np.triu_indices(len(half), 1)
    keep = sub[iu, ju] >= R / 3 - DIST_TOL
    xs, ys = half[iu[keep]], half[ju[keep]]
    if len(xs) == 0:
        raise ParameterError(f"no admissible pair in B({x0}, {R / 2})")
    pos = np.full(g.n, -1, dtype=np.int64)
    pos[D] = np.arange(len(D))
    G = neumann_green(g, D)
    balls = {int(v): pos[g.ball(int(v), R / 8)] for v in half}
    chunks = [range(s, min(s + chunk, len(xs))) for s in range(0, len(xs), chunk)]
    parts = pmap(lambda c: _set_conductances(G, [balls[int(xs[i])] for i in c],
                                             [balls[int(ys[i])] for i in c]), chunks)
    ce = np.concatenate(parts)
    i_hi, i_lo = int(np.argmax(ce)), int(np.argmin(ce))
    return {"x0": int(x0), "R": float(R), "pairs": int(len(ce)), "domain_size": int(len(D)),
            "sup": float(ce[i_hi]), "inf": float(ce[i_lo]), "C_D": float(ce[i_hi] / ce[i_lo]),
            "sup_witness": {"x": int(xs[i_hi]), "y": int(ys[i_hi])},
            "inf_witness": {"x": int(xs[i_lo]), "y": int(ys[i_lo])}}


__all__ = [
    "NetDiscretization", "discretize", "nearest_net_map", "rough_isometry_check",
    "transfer_inequality_experiment", "neumann_green", "dumbbell_report",
]
