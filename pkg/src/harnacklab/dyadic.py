"""Generalized dyadic cubes, cube capacities and the mass-transfer measure.

Given a closed ball ``B0 = B(x0, r)`` and a scale factor ``A`` (default 8),
level ``k`` uses a maximal ``r A^-k``-separated net ``N_k`` of ``B0`` built
greedily with ``N_{k-1}`` first, so the nets increase.  The level-``k`` cube
of a vertex is the nearest ``N_k`` point (ties by index) among the
successors of its level-``k-1`` cube, which makes the partitions nested.
The hierarchy stops at the first level ``l`` with ``r A^-l <= 1``.

Cube capacities ``c_k(x) = Cap_{B(x, A^{1-k} r)}(Q_k(x))`` drive a
Vol'berg-Konyagin style cascade ``mu_0 -> mu_1 -> ... -> mu_l`` whose
ratio constraints are asserted, not assumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dirichlet import check_measure
from .errors import ConstructionError, ParameterError
from .graph_core import DIST_TOL, WeightedGraph, epsilon_net
from .parallel import pmap
from .potential import capacity

MASS_TOL = 1e-12


@dataclass
class CubeHierarchy:
    """Nested nets and cube assignments of a closed ball.

    ``assign[k][v]`` is the level-``k`` center of vertex ``v`` (``-1`` off
    ``B0``); ``children[k][x]`` lists ``S_k(x)`` and ``parent[k][y]`` is
    ``P_k(y)`` for ``y`` in ``N_k``, ``k >= 1``.
    """

    graph: WeightedGraph
    x0: int
    r: float
    A: float
    ball: np.ndarray
    nets: list
    assign: list
    children: list
    parent: list

    @property
    def depth(self) -> int:
        return len(self.nets) - 1

    @property
    def c_A(self) -> float:
        return 0.5 - 1.0 / (self.A - 1)

    def scale(self, k: int) -> float:
        return self.r * self.A ** (-k)

    def cube(self, k: int, x: int) -> np.ndarray:
        return np.flatnonzero(self.assign[k] == x)

    @property
    def C_M(self) -> int:
        return max((len(s) for lvl in self.children for s in lvl.values()), default=1)

    def to_json(self) -> list:
        out = []
        for k, net in enumerate(self.nets):
            for x in net:
                out.append({"level": k, "center": int(x), "members": self.cube(k, x).tolist()})
        return out


def build_cube_hierarchy(g: WeightedGraph, x0: int, r: float, A: float = 8.0) -> CubeHierarchy:
    """Dyadic cubes of the closed ball ``B(x0, r)``."""
    if r < 1:
        raise ParameterError("r must be >= 1")
    if A < 4:
        raise ParameterError("A must be >= 4")
    ball = g.ball(x0, r, closed=True)
    depth = 0
    while r * A ** (-depth) > 1 + DIST_TOL:
        depth += 1
    nets = [np.array([x0])]
    assign = [np.full(g.n, -1, dtype=np.int64)]
    assign[0][ball] = x0
    children, parent = [], [{}]
    for k in range(1, depth + 1):
        net = epsilon_net(g, r * A ** (-k), candidates=ball, seeds=nets[-1], include_root=False)
        prev = assign[-1]
        kids: dict[int, list] = {int(x): [] for x in nets[-1]}
        for y in net:
            kids[int(prev[y])].append(int(y))
        cur = np.full(g.n, -1, dtype=np.int64)
        for x, ys in kids.items():
            members = np.flatnonzero(prev == x)
            ys_arr = np.array(sorted(ys))
            dist = np.array([g.distances_from(y)[members] for y in ys_arr])
            cur[members] = ys_arr[np.argmin(dist, axis=0)]
        nets.append(np.asarray(net))
        assign.append(cur)
        children.append({x: np.array(sorted(ys)) for x, ys in kids.items()})
        parent.append({int(y): int(prev[y]) for y in net})
    return CubeHierarchy(g, int(x0), float(r), float(A), ball, nets, assign, children, parent)


def check_hierarchy(h: CubeHierarchy) -> dict:
    """Exhaustive partition, nesting, net and ball-sandwich checks."""
    g = h.graph
    issues = []
    for k, net in enumerate(h.nets):
        a = h.assign[k]
        if not np.all(a[h.ball] >= 0) or np.any(np.delete(a, h.ball) >= 0):
            issues.append(("partition", k))
        if k and not set(h.nets[k - 1].tolist()) <= set(net.tolist()):
            issues.append(("nets_increase", k))
        s = h.scale(k)
        d = g.distance_matrix[np.ix_(net, net)] if len(net) > 1 else np.zeros((1, 1))
        if len(net) > 1 and (d + np.eye(len(net)) * s * 2).min() < s - DIST_TOL:
            issues.append(("separated", k))
        cover = np.array([g.distances_from(v)[net].min() for v in h.ball])
        if k and cover.max() >= s - DIST_TOL:
            issues.append(("maximal", k))
        for x in net:
            q = h.cube(k, x)
            dx = g.distances_from(x)
            if k and dx[q].max() >= s - DIST_TOL:
                issues.append(("outer_ball", k, int(x)))
            inner = h.ball[dx[h.ball] < h.c_A * s - DIST_TOL]
            if not np.all(a[inner] == x):
                issues.append(("inner_ball", k, int(x)))
        if k:
            prev = h.assign[k - 1]
            for x in net:
                if len(np.unique(prev[h.cube(k, x)])) != 1:
                    issues.append(("nesting", k, int(x)))
    return {"ok": not issues, "issues": issues}


@dataclass
class CubeCapacities:
    """``values[k][x] = c_k(x)``; ``nan`` when the cube has no exterior."""

    values: list
    radius: list
    clipped: list
    C1: float
    ce1: dict
    ce2: dict


def cube_capacities(h: CubeHierarchy) -> CubeCapacities:
    """Capacities of every cube in its enlarged ball, plus comparability ratios.

    The domain ``B(x, A^{1-k} r)`` is clipped to ``B(x, ecc(x))`` when it
    would cover the graph; a cube that still is not contained in its domain
    gets ``nan``.  Both cases are flagged in ``clipped`` and left out of the
    comparability constants, the subadditivity gains and the ratio checks.
    """
    g = h.graph
    values, radius, clipped = [], [], []
    for k, net in enumerate(h.nets):
        rho = h.r * h.A ** (1 - k)

        def one(x, k=k, rho=rho):
            q = h.cube(k, x)
            dom = g.ball(x, rho)
            clip = False
            if len(dom) == g.n:
                dom = g.ball(x, g.eccentricity(x))
                clip = True
            if not np.all(np.isin(q, dom)):
                return math.nan, clip, True
            return capacity(g, q, dom).value, clip, False

        res = pmap(one, [int(x) for x in net])
        values.append({int(x): v for x, (v, _, _) in zip(net, res)})
        clipped.append({int(x): c or bad for x, (_, c, bad) in zip(net, res)})
        radius.append(rho)
    def usable(k, x):
        return not clipped[k][int(x)]

    ce1 = {"ratio": 1.0, "witness": None}
    ce2 = {"ratio": 1.0, "witness": None}
    for k, net in enumerate(h.nets):
        ck = values[k]
        lim = 4 * h.scale(k)
        for i, x in enumerate(net):
            dx = g.distances_from(x)
            for y in net[i + 1:]:
                if dx[y] <= lim + DIST_TOL and usable(k, x) and usable(k, y):
                    rt = max(ck[int(x)] / ck[int(y)], ck[int(y)] / ck[int(x)])
                    if rt > ce1["ratio"]:
                        ce1 = {"ratio": rt, "witness": {"level": k, "pair": [int(x), int(y)]}}
        if k < h.depth:
            for x, ys in h.children[k].items():
                for y in ys:
                    a, b = ck[x], values[k + 1][int(y)]
                    if usable(k, x) and usable(k + 1, y):
                        rt = max(a / b, b / a)
                        if rt > ce2["ratio"]:
                            ce2 = {"ratio": rt, "witness": {"level": k, "parent": x, "child": int(y)}}
    return CubeCapacities(values, radius, clipped, max(ce1["ratio"], ce2["ratio"]), ce1, ce2)


def check_cube_subadditivity(h: CubeHierarchy, caps: CubeCapacities) -> dict:
    """``delta(k, x) = 1 - c_k(x) / sum_{y in S_k(x)} c_{k+1}(y)`` for cells with two or more children.

    Cells whose own capacity domain was clipped are skipped: their
    capacity is taken in a different kind of domain than the children's.
    """
    cells = []
    skipped = 0
    for k in range(h.depth):
        for x, ys in h.children[k].items():
            ck = caps.values[k][x]
            if len(ys) < 2 or not np.isfinite(ck) or caps.clipped[k][x]:
                skipped += 1
                continue
            total = sum(caps.values[k + 1][int(y)] for y in ys)
            cells.append({"level": k, "x": int(x), "delta": 1.0 - ck / total})
    deltas = [c["delta"] for c in cells]
    worst = min(cells, key=lambda c: c["delta"]) if cells else None
    return {"cells": cells, "min_delta": min(deltas) if deltas else None,
            "witness": worst, "skipped": skipped}


@dataclass
class MassTransferState:
    level: int
    mu: dict
    ledger: list = field(default_factory=list)


def _ratio(state_mu, caps_k, x):
    return state_mu[x] / caps_k[x]


def transfer_step(state: MassTransferState, h: CubeHierarchy, caps: CubeCapacities,
                  C2: float, delta: float) -> MassTransferState:
    """One Vol'berg-Konyagin step ``mu_k -> mu_{k+1}``.

    Proportional split to successors, then one pass over close pairs in
    lexicographic order, moving just enough mass to restore the ratio bound
    ``C2^2``.  Mass conservation, both ratio bounds, the absence of transfer
    chains and the transfer-distance bound are asserted; any violation raises
    :class:`ConstructionError` with a witness.
    """
    g = h.graph
    k = state.level
    if k >= h.depth:
        raise ParameterError("already at the bottom level")
    ck, cn = caps.values[k], caps.values[k + 1]
    net = h.nets[k + 1]
    f = {}
    ledger = []
    for e, ys in h.children[k].items():
        total = sum(cn[int(y)] for y in ys)
        for y in ys:
            f[int(y)] = cn[int(y)] / total * state.mu[e]
            ledger.append({"kind": "split", "source": e, "destination": int(y),
                           "amount": f[int(y)], "distance": float(g.distances_from(e)[y])})
    C22 = C2 * C2
    lim = 4 * h.scale(k + 1)
    pairs = []
    for i, a in enumerate(net):
        da = g.distances_from(a)
        for b in net[i + 1:]:
            if 0 < da[b] <= lim + DIST_TOL:
                pairs.append((int(min(a, b)), int(max(a, b))))
    pairs.sort()
    received, sent_after = set(), []
    for a, b in pairs:
        for src, dst in ((a, b), (b, a)):
            if f[src] / cn[src] > C22 * f[dst] / cn[dst]:
                alpha = (f[src] * cn[dst] - C22 * f[dst] * cn[src]) / (cn[dst] + C22 * cn[src])
                f[src] -= alpha
                f[dst] += alpha
                if src in received:
                    sent_after.append((src, dst))
                received.add(dst)
                origin = h.parent[k + 1][src]
                ledger.append({"kind": "repair", "source": src, "destination": dst, "amount": alpha,
                               "distance": float(g.distances_from(src)[dst]),
                               "composite_distance": float(g.distances_from(origin)[dst])})
    total_in = sum(state.mu.values())
    total_out = sum(f.values())
    if abs(total_in - total_out) > MASS_TOL:
        raise ConstructionError("mass not conserved", {"level": k, "in": total_in, "out": total_out})
    if sent_after:
        raise ConstructionError("transfer chain detected", {"level": k, "pair": sent_after[0]})
    bound = (1 + 4 / h.A) * h.scale(k)
    for item in ledger:
        dist = item.get("composite_distance", item["distance"])
        if dist > bound + DIST_TOL:
            raise ConstructionError("mass moved too far", {"level": k, "transfer": item, "bound": bound})
    for a, b in pairs:
        ra, rb = f[a] / cn[a], f[b] / cn[b]
        if ra > C22 * rb * (1 + 1e-9) or rb > C22 * ra * (1 + 1e-9):
            raise ConstructionError("close-pair ratio bound violated",
                                    {"level": k + 1, "pair": [a, b], "ratios": [ra, rb], "C2": C2})
    for e, ys in h.children[k].items():
        if not np.isfinite(ck[e]) or caps.clipped[k][e]:
            continue
        pr = state.mu[e] / ck[e]
        factor = (1 - delta) if len(ys) >= 2 else 1.0
        for y in ys:
            cr = f[int(y)] / cn[int(y)]
            if cr < pr / C2 * (1 - 1e-9) or cr > factor * pr * (1 + 1e-9):
                raise ConstructionError("parent/child ratio bound violated",
                                        {"level": k, "parent": e, "child": int(y),
                                         "child_ratio": cr, "parent_ratio": pr,
                                         "C2": C2, "delta": delta})
    return MassTransferState(k + 1, f, ledger)


@dataclass
class GoodMeasure:
    """Density ``f`` (zero off ``B0``), measure ``mu = f m`` and construction data."""

    density: np.ndarray
    mu: np.ndarray
    hierarchy: CubeHierarchy
    capacities: CubeCapacities
    states: list
    constants: dict
    verification: dict | None = None


def build_ball_measure(g: WeightedGraph, m, x0: int, r: float, A: float = 8.0,
                       verify: bool = True, **verify_opts) -> GoodMeasure:
    """Run the cascade on ``B(x0, r)`` and return the resulting measure.

    ``C1`` is the observed cube comparability constant, ``C_M`` the largest
    successor count, ``C2 = C1 C_M`` and ``delta`` the smallest observed
    subadditivity gain (0, i.e. no gain assumed, when no usable cell
    has two successors).
    """
    m = check_measure(g, m)
    h = build_cube_hierarchy(g, x0, r, A)
    caps = cube_capacities(h)
    sub = check_cube_subadditivity(h, caps)
    delta = sub["min_delta"] if sub["min_delta"] is not None else 0.0
    if sub["min_delta"] is not None and delta <= 0:
        raise ConstructionError("cube subadditivity failed", sub["witness"])
    C_M = h.C_M
    C2 = caps.C1 * C_M
    states = [MassTransferState(0, {int(x0): 1.0})]
    for _ in range(h.depth):
        states.append(transfer_step(states[-1], h, caps, C2, delta))
    mu_l = states[-1].mu
    f = np.zeros(g.n)
    for y, mass in mu_l.items():
        q = h.cube(h.depth, y)
        f[q] = mass / m[q].sum()
    f /= f[x0]
    constants = {"C1": caps.C1, "C_M": C_M, "C2": C2, "delta": delta, "depth": h.depth,
                 "ce1": caps.ce1, "ce2": caps.ce2, "subadditivity_witness": sub["witness"],
                 "subadditivity_skipped": sub["skipped"]}
    gm = GoodMeasure(f, f * m, h, caps, states, constants)
    if verify:
        gm.verification = verify_capacity_good(g, f, m, x0, r, **verify_opts)
    return gm


def extend_density(g: WeightedGraph, density: np.ndarray, ball: np.ndarray) -> np.ndarray:
    """Extend a density given on ``ball`` to all vertices by the nearest ball vertex (ties by index)."""
    out = np.array(density, dtype=float)
    outside = np.setdiff1d(np.arange(g.n), ball)
    for v in outside:
        d = g.distances_from(v)[ball]
        out[v] = density[ball[int(np.argmin(d))]]
    return out


def _dyadic_radii(limit: float) -> list:
    out, s = [], 1.0
    while s <= limit + DIST_TOL:
        out.append(s)
        s *= 2
    return out


def _sample_centers(ball: np.ndarray, max_centers: int) -> list:
    if len(ball) <= max_centers:
        return [int(v) for v in ball]
    stride = int(math.ceil(len(ball) / max_centers))
    return [int(v) for v in ball[::stride]]


def verify_capacity_good(g: WeightedGraph, density, m, x0: int, R: float,
                         max_centers: int = 200, closed: bool = True) -> dict:
    """Smallest constants for which the sampled capacity-goodness inequalities hold.

    The measure is ``nu = density * m`` on ``D = B(x0, R)`` (closed by
    default).  Radii are powers of two.  Checks:

    * doubling ``nu(B(x,2s)) / nu(B(x,s))`` when ``B(x,2s)`` lies in ``D``;
    * the two-sided power bound on
      ``T = nu(B(x,s2)) Cap_{B(x,8 s1)}(B(x,s1)) / (nu(B(x,s1)) Cap_{B(x,8 s2)}(B(x,s2)))``:
      ``beta1``/``beta2`` are least-squares slopes of the per-ratio minimum and
      maximum of ``log T`` against ``log(s2/s1)``; capacity cells whose domain
      covers the graph are skipped and counted;
    * density oscillation over closed unit balls inside ``D``;
    * ``C0^{-1-d(x0,y)} <= density(y) <= C0^{1+d(x0,y)}`` on ``D``.

    ``C0`` is the largest constant any check needs.
    """
    m = check_measure(g, m)
    f = np.asarray(density, dtype=float)
    D = g.ball(x0, R, closed=closed)
    if np.any(f[D] <= 0):
        raise ParameterError("density must be positive on the ball")
    nu = f * m
    inD = np.zeros(g.n, dtype=bool)
    inD[D] = True
    centers = _sample_centers(D, max_centers)
    radii = _dyadic_radii(2 * R)
    cap_cache: dict = {}
    skipped = 0

    def cap(x, s):
        key = (x, s)
        if key not in cap_cache:
            dom = g.ball(x, 8 * s)
            cap_cache[key] = None if len(dom) == g.n else capacity(g, g.ball(x, s), dom).value
        return cap_cache[key]

    doubling, dwit = 1.0, None
    samples = []
    for x in centers:
        inside = [s for s in radii if np.all(inD[g.ball(x, s)])]
        for s in inside:
            if 2 * s in inside:
                rt = nu[g.ball(x, 2 * s)].sum() / nu[g.ball(x, s)].sum()
                if rt > doubling:
                    doubling, dwit = float(rt), {"x": x, "s": s}
        for i, s1 in enumerate(inside):
            c1 = cap(x, s1)
            if c1 is None:
                skipped += len(inside) - i - 1
                continue
            for s2 in inside[i + 1:]:
                c2 = cap(x, s2)
                if c2 is None:
                    skipped += 1
                    continue
                t = nu[g.ball(x, s2)].sum() * c1 / (nu[g.ball(x, s1)].sum() * c2)
                samples.append((x, s1, s2, t))
    out = {"doubling": doubling, "doubling_witness": dwit, "capacity_ratio_skipped": skipped,
           "capacity_ratio_samples": len(samples)}
    beta1 = beta2 = None
    ratio_const = 1.0
    ratio_wit = None
    if samples:
        by_t: dict = {}
        for x, s1, s2, t in samples:
            by_t.setdefault(s2 / s1, []).append(math.log(t))
        ts = sorted(by_t)
        lo = np.array([min(by_t[t]) for t in ts])
        hi = np.array([max(by_t[t]) for t in ts])
        lt = np.log(ts)
        if len(ts) >= 2:
            beta1 = float(np.polyfit(lt, lo, 1)[0])
            beta2 = float(np.polyfit(lt, hi, 1)[0])
        else:
            beta1 = float(lo[0] / lt[0])
            beta2 = float(hi[0] / lt[0])
        beta2 = max(beta1, beta2)
        for x, s1, s2, t in samples:
            need = max((s2 / s1) ** beta1 / t, t / (s2 / s1) ** beta2)
            if need > ratio_const:
                ratio_const, ratio_wit = float(need), {"x": x, "s1": s1, "s2": s2, "T": t}
    out.update(beta1=beta1, beta2=beta2, capacity_ratio_constant=ratio_const, capacity_ratio_witness=ratio_wit)
    osc, owit = 1.0, None
    for x in D:
        nb = g.ball(x, 1.0, closed=True)
        if np.all(inD[nb]):
            rt = f[nb].max() / f[nb].min()
            if rt > osc:
                osc, owit = float(rt), {"x": int(x)}
    d0 = g.distances_from(x0)[D]
    lf = np.abs(np.log(f[D]))
    growth = float(np.exp((lf / (1 + d0)).max()))
    out.update(oscillation=osc, oscillation_witness=owit, growth=growth)
    C0 = max(doubling, ratio_const, osc, growth)
    out.update(C0=C0, capacity_good=beta1 is not None and beta1 > 0)
    return out


def rvd_report(g: WeightedGraph, mu, centers, radii) -> dict:
    """Reverse-doubling exponent: ``mu(B(x,r))/mu(B(x,s)) >= C0 (r/s)^alpha``.

    ``alpha`` is the least-squares slope through the origin of the log ratio
    against ``log(r/s)`` over all sampled pairs ``s < r``; ``C0`` is then the
    largest constant consistent with every pair.
    """
    radii = sorted(float(r) for r in radii)
    if len(radii) < 3:
        raise ParameterError("at least 3 scales are required")
    mu = np.asarray(mu, dtype=float)
    lx, ly, wit = [], [], []
    for x in centers:
        masses = [mu[g.ball(x, r)].sum() for r in radii]
        for i in range(len(radii)):
            for j in range(i + 1, len(radii)):
                lx.append(math.log(radii[j] / radii[i]))
                ly.append(math.log(masses[j] / masses[i]))
                wit.append((int(x), radii[i], radii[j]))
    lx, ly = np.array(lx), np.array(ly)
    alpha = float(lx @ ly / (lx @ lx))
    slack = ly - alpha * lx
    i = int(np.argmin(slack))
    return {"alpha": alpha, "C0": float(np.exp(slack[i])),
            "witness": {"x": wit[i][0], "s": wit[i][1], "r": wit[i][2]}}
