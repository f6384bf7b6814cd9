"""Shared graph corpus and random-instance helpers for the tests."""

import numpy as np

from harnacklab import graph_core as gc
from harnacklab.sampling import make_rng


def random_connected(n, extra, seed, weighted=True):
    """Random spanning tree plus ``extra`` chords; log-uniform weights in [1/4, 4]."""
    rng = make_rng(seed, 7)
    extra = min(extra, n * (n - 1) // 2 - (n - 1))
    order = rng.permutation(n)
    edges = {tuple(sorted((int(order[i]), int(order[rng.integers(0, i)])))) for i in range(1, n)}
    while len(edges) < n - 1 + extra:
        u, v = rng.integers(0, n, 2)
        if u != v:
            edges.add((int(min(u, v)), int(max(u, v))))
    edges = sorted(edges)
    w = np.exp(rng.uniform(-np.log(4), np.log(4), len(edges))) if weighted else None
    return gc.WeightedGraph(n, np.array(edges), weights=w, root=int(order[0]))


def corpus():
    """25 graphs with at most 300 vertices."""
    out = [
        ("path9", gc.path_graph(9)),
        ("path40", gc.path_graph(40)),
        ("path150", gc.path_graph(150)),
        ("cycle8", gc.cycle_graph(8)),
        ("cycle60", gc.cycle_graph(60)),
        ("star6", gc.star_graph(6)),
        ("star_w", gc.star_graph(4, [1.0, 2.0, 0.5, 3.0])),
        ("lattice5", gc.lattice2d(5)),
        ("lattice9", gc.lattice2d(9)),
        ("lattice13", gc.lattice2d(13)),
        ("lattice17", gc.lattice2d(17)),
        ("gasket2", gc.sierpinski_gasket_graph(2)),
        ("gasket3", gc.sierpinski_gasket_graph(3)),
        ("tree23", gc.spherically_symmetric_tree([2, 3], 6)),
        ("tree2345", gc.spherically_symmetric_tree([2, 3, 4, 5], 5)),
        ("join", gc.graph_join(gc.sierpinski_gasket_graph(2), gc.lattice2d(5))),
        ("cable_path", gc.subdivide_edges(gc.path_graph(6), 4)),
    ]
    for i, (n, extra) in enumerate([(20, 5), (50, 30), (80, 10), (120, 60), (160, 0),
                                    (200, 100), (250, 40), (300, 150)]):
        out.append((f"random{i}", random_connected(n, extra, 100 + i)))
    assert len(out) == 25 and all(g.n <= 300 for _, g in out)
    return out


def random_domain(g, rng):
    """A random ball domain with a nonempty boundary and a vertex inside it."""
    while True:
        x = int(rng.integers(g.n))
        ecc = g.eccentricity(x)
        r = float(rng.uniform(max(0.6, 0.3 * ecc), max(0.9 * ecc, 0.7)))
        D = g.ball(x, r)
        if 0 < len(D) < g.n:
            return x, D


def subadditivity_instances():
    """The three shipped enhanced-subadditivity instances as keyword dicts."""
    path = gc.path_graph(129)
    lat = gc.lattice2d(33)
    c = lat.root
    blobs = [lat.ball(c - 3, 2, closed=True), lat.ball(c + 3, 2, closed=True)]
    return {
        "path": dict(g=path, D=path.ball(64, 64), parts=[[59], [69]], centers=[59, 69], x0=64, R=8),
        "lattice2d": dict(g=lat, D=lat.ball(c, 17), parts=[[c - 1], [c + 1]], centers=[c - 1, c + 1],
                          x0=c, R=2),
        "two_blob": dict(g=lat, D=lat.ball(c, 16), parts=blobs, centers=[c - 3, c + 3]),
    }


def graph_strategy(max_n=30):
    """Hypothesis strategy for small random connected weighted graphs."""
    from hypothesis import strategies as st

    return st.builds(lambda n, extra, seed: random_connected(n, extra, seed),
                     st.integers(3, max_n), st.integers(0, 20), st.integers(0, 10**6))
