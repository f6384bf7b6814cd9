"""Weighted graphs, their shortest-path metric, balls, nets and generators.

A :class:`WeightedGraph` carries a conductance ``w_e > 0`` and a length
``l_e > 0`` on every edge.  The vertex weight is ``w_x = sum_{y~x} w_xy``.
Balls are open, ``B(x, r) = {y : d(x, y) < r}``; pass ``closed=True`` for
``d(x, y) <= r``.  Comparisons against radii use the absolute tolerance
:data:`DIST_TOL` so that subdivided lengths such as ``1/3`` behave.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from .errors import ParameterError, TopologyError

DIST_TOL = 1e-9
ALL_PAIRS_CACHE_LIMIT = 2000
EXACT_PACKING_LIMIT = 12

GENERATOR_KINDS = (
    "path",
    "cycle",
    "star",
    "lattice2d",
    "sierpinski_gasket_graph",
    "spherically_symmetric_tree",
    "graph_join",
)


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Finite connected weighted graph.

    Parameters
    ----------
    n : int
        Number of vertices, indexed ``0..n-1``.
    edges : array of shape (m, 2)
        Unordered vertex pairs; stored with ``u < v``.
    weights, lengths : arrays of shape (m,)
        Conductances and edge lengths, default 1.
    root : int
        Canonical root/center used by generators and reports.
    labels : tuple of str, optional
        External vertex ids (file format); defaults to ``str(i)``.
    """

    n: int
    edges: np.ndarray
    weights: np.ndarray = None
    lengths: np.ndarray = None
    root: int = 0
    labels: tuple = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        m = len(edges)
        weights = np.ones(m) if self.weights is None else np.asarray(self.weights, dtype=float).copy()
        lengths = np.ones(m) if self.lengths is None else np.asarray(self.lengths, dtype=float).copy()
        if self.n < 1:
            raise ParameterError("graph needs at least one vertex")
        if weights.shape != (m,) or lengths.shape != (m,):
            raise ParameterError("weights/lengths must have one entry per edge")
        if m and (edges.min() < 0 or edges.max() >= self.n):
            raise ParameterError("edge endpoint out of range")
        if np.any(edges[:, 0] == edges[:, 1]):
            raise ParameterError("self-loops are not allowed")
        if np.any(weights <= 0) or np.any(lengths <= 0):
            raise ParameterError("weights and lengths must be strictly positive")
        edges = np.sort(edges, axis=1)
        if len({(int(u), int(v)) for u, v in edges}) != m:
            raise ParameterError("duplicate edges")
        labels = tuple(str(i) for i in range(self.n)) if self.labels is None else tuple(self.labels)
        if len(labels) != self.n:
            raise ParameterError("one label per vertex required")
        if not 0 <= self.root < self.n:
            raise ParameterError("root out of range")
        for arr in (edges, weights, lengths):
            arr.setflags(write=False)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "labels", labels)
        if self.n > 1:
            ncomp, _ = csgraph.connected_components(self.adjacency, directed=False)
            if ncomp != 1:
                raise TopologyError(f"graph is disconnected ({ncomp} components)")

    # -- structure -----------------------------------------------------

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        """Symmetric conductance matrix ``W``."""
        return self._symmetric(self.weights)

    @cached_property
    def length_matrix(self) -> sp.csr_matrix:
        return self._symmetric(self.lengths)

    def _symmetric(self, values):
        u, v = self.edges[:, 0], self.edges[:, 1]
        mat = sp.coo_matrix(
            (np.concatenate([values, values]), (np.concatenate([u, v]), np.concatenate([v, u]))),
            shape=(self.n, self.n),
        )
        return mat.tocsr()

    @cached_property
    def vertex_weight(self) -> np.ndarray:
        """``w_x``, the sum of incident edge weights."""
        w = np.zeros(self.n)
        np.add.at(w, self.edges[:, 0], self.weights)
        np.add.at(w, self.edges[:, 1], self.weights)
        w.setflags(write=False)
        return w

    @cached_property
    def laplacian(self) -> sp.csr_matrix:
        """Conductance Laplacian ``diag(w_x) - W`` (positive semidefinite)."""
        return (sp.diags(self.vertex_weight) - self.adjacency).tocsr()

    def neighbors(self, v: int) -> np.ndarray:
        adj = self.adjacency
        return adj.indices[adj.indptr[v]:adj.indptr[v + 1]]

    @cached_property
    def degree(self) -> np.ndarray:
        return np.diff(self.adjacency.indptr)

    # -- metric --------------------------------------------------------

    def distances_from(self, x: int) -> np.ndarray:
        if self.n <= ALL_PAIRS_CACHE_LIMIT:
            return self.distance_matrix[x]
        key = ("row", int(x))
        if key not in self._cache:
            self._cache[key] = csgraph.dijkstra(self.length_matrix, directed=False, indices=int(x))
        return self._cache[key]

    @cached_property
    def distance_matrix(self) -> np.ndarray:
        """All-pairs shortest-path distances (computed once, read-only)."""
        dist = csgraph.dijkstra(self.length_matrix, directed=False)
        dist.setflags(write=False)
        return dist

    def ball(self, x: int, r: float, closed: bool = False) -> np.ndarray:
        """Vertex indices of ``B(x, r)`` (open unless ``closed``), ascending."""
        d = self.distances_from(x)
        mask = d <= r + DIST_TOL if closed else d < r - DIST_TOL
        return np.flatnonzero(mask)

    def eccentricity(self, x: int) -> float:
        return float(self.distances_from(x).max())

    @cached_property
    def diameter(self) -> float:
        return float(self.distance_matrix.max())

    @cached_property
    def min_length(self) -> float:
        return float(self.lengths.min()) if self.num_edges else 1.0

    @cached_property
    def max_length(self) -> float:
        return float(self.lengths.max()) if self.num_edges else 1.0

    # -- derived graphs ------------------------------------------------

    def with_weights(self, weights) -> "WeightedGraph":
        return WeightedGraph(self.n, self.edges, weights, self.lengths, self.root, self.labels)

    def scaled(self, c: float) -> "WeightedGraph":
        return self.with_weights(self.weights * c)

    def boundary(self, vertices: Iterable[int]) -> np.ndarray:
        """Outer vertex boundary ``{y not in D : y ~ x for some x in D}``."""
        inside = np.zeros(self.n, dtype=bool)
        inside[np.asarray(list(vertices), dtype=np.int64)] = True
        reach = self.adjacency @ inside.astype(float) > 0
        return np.flatnonzero(reach & ~inside)

    def interior(self, vertices: Iterable[int]) -> np.ndarray:
        """Vertices of the set all of whose neighbours lie in the set."""
        verts = np.asarray(sorted(set(int(v) for v in vertices)), dtype=np.int64)
        inside = np.zeros(self.n, dtype=bool)
        inside[verts] = True
        outside_nbrs = self.adjacency @ (~inside).astype(float)
        return verts[outside_nbrs[verts] == 0]


def as_index_array(vertices) -> np.ndarray:
    return np.asarray(sorted(set(int(v) for v in np.atleast_1d(vertices))), dtype=np.int64)


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------

def path_graph(n: int) -> WeightedGraph:
    if n < 1:
        raise ParameterError("path needs n >= 1")
    return WeightedGraph(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> WeightedGraph:
    if n < 3:
        raise ParameterError("cycle needs n >= 3")
    return WeightedGraph(n, [(i, (i + 1) % n) for i in range(n)])


def star_graph(k: int, weights: Sequence[float] | None = None) -> WeightedGraph:
    """Center 0 joined to leaves ``1..k``."""
    if weights is not None:
        k = len(weights)
    if k < 1:
        raise ParameterError("star needs at least one leaf")
    return WeightedGraph(k + 1, [(0, i) for i in range(1, k + 1)], weights)


def lattice2d(n: int) -> WeightedGraph:
    """``n x n`` grid, row-major indices; ``root`` is the central vertex."""
    if n < 1:
        raise ParameterError("lattice needs n >= 1")
    edges = []
    for i in range(n):
        for j in range(n):
            v = i * n + j
            if j + 1 < n:
                edges.append((v, v + 1))
            if i + 1 < n:
                edges.append((v, v + n))
    center = (n // 2) * n + n // 2
    return WeightedGraph(n * n, edges, root=center)


def sierpinski_gasket_graph(level: int) -> WeightedGraph:
    """Level-``level`` Sierpinski gasket graph; level 0 is a triangle.

    Vertices are points of the triangular lattice; vertex 0 is the corner
    at the origin.
    """
    if level < 0:
        raise ParameterError("level must be >= 0")
    side = 2 ** level
    triangles = [(0, 0)]
    s = side
    while s > 1:
        s //= 2
        triangles = [(a + da, b + db) for a, b in triangles for da, db in ((0, 0), (s, 0), (0, s))]
    edge_set = set()
    for a, b in triangles:
        p, q, r = (a, b), (a + 1, b), (a, b + 1)
        for e in ((p, q), (q, r), (p, r)):
            edge_set.add(tuple(sorted(e)))
    points = sorted({pt for e in edge_set for pt in e}, key=lambda t: (t[1], t[0]))
    index = {pt: i for i, pt in enumerate(points)}
    edges = sorted((index[u], index[v]) for u, v in edge_set)
    return WeightedGraph(len(points), edges)


def spherically_symmetric_tree(degrees: Sequence[int], depth: int | None = None,
                               tail: int = 1) -> WeightedGraph:
    """Rooted tree where every level-``k`` vertex has ``degrees[k]`` children.

    Levels at or beyond ``len(degrees)`` use ``tail`` children (default 1,
    i.e. the branches continue as disjoint rays).  ``depth`` is the index of
    the last level (default ``len(degrees)``).
    """
    degrees = [int(d) for d in degrees]
    depth = len(degrees) if depth is None else int(depth)
    if depth < 0 or any(d < 1 for d in degrees) or tail < 1:
        raise ParameterError("tree needs depth >= 0 and positive degrees")
    edges = []
    level = [0]
    n = 1
    for k in range(depth):
        children = degrees[k] if k < len(degrees) else tail
        nxt = []
        for v in level:
            for _ in range(children):
                edges.append((v, n))
                nxt.append(n)
                n += 1
        level = nxt
    return WeightedGraph(n, edges)


def tree_level_sizes(g: WeightedGraph) -> list[int]:
    d = np.rint(g.distances_from(g.root)).astype(int)
    return np.bincount(d).tolist()


def graph_join(g1: WeightedGraph, g2: WeightedGraph) -> WeightedGraph:
    """One-point union identifying ``g1.root`` with ``g2.root``."""
    remap = np.empty(g2.n, dtype=np.int64)
    others = [v for v in range(g2.n) if v != g2.root]
    remap[g2.root] = g1.root
    remap[others] = g1.n + np.arange(len(others))
    edges = np.concatenate([g1.edges, remap[g2.edges]])
    return WeightedGraph(
        g1.n + len(others), edges,
        np.concatenate([g1.weights, g2.weights]),
        np.concatenate([g1.lengths, g2.lengths]),
        root=g1.root,
    )


def generate(kind: str, **params) -> WeightedGraph:
    """Build one of the shipped graph families (unit weights and lengths).

    ``params`` may include ``weights`` to override the unit conductances.
    """
    weights = params.pop("weights", None)
    try:
        if kind == "path":
            g = path_graph(int(params["n"]))
        elif kind == "cycle":
            g = cycle_graph(int(params["n"]))
        elif kind == "star":
            g = star_graph(int(params.get("k", 0)), weights)
            weights = None
        elif kind == "lattice2d":
            g = lattice2d(int(params["n"]))
        elif kind == "sierpinski_gasket_graph":
            g = sierpinski_gasket_graph(int(params["level"]))
        elif kind == "spherically_symmetric_tree":
            g = spherically_symmetric_tree(params["degrees"], params.get("depth"), params.get("tail", 1))
        elif kind == "graph_join":
            g = graph_join(params["first"], params["second"])
        else:
            raise ParameterError(f"unknown graph kind {kind!r}")
    except KeyError as exc:
        raise ParameterError(f"missing parameter {exc} for {kind}") from None
    if weights is not None:
        g = g.with_weights(weights)
    return g


_ALIASES = {
    "sst": "spherically_symmetric_tree",
    "tree": "spherically_symmetric_tree",
    "sg": "sierpinski_gasket_graph",
    "gasket": "sierpinski_gasket_graph",
    "grid": "lattice2d",
    "join": "graph_join",
}

DEFAULT_TREE_DEPTH = 17


def from_spec(spec: str) -> WeightedGraph:
    """Parse a compact generator spec.

    Examples: ``path:9``, ``lattice2d:33``, ``sst:2,3,4,5`` (depth defaults
    to :data:`DEFAULT_TREE_DEPTH`), ``sst:2,3,4,5;depth=12``,
    ``star:1,1,2`` (leaf weights), ``gasket:3``, ``join:gasket:3+lattice2d:5``.
    """
    head, _, rest = spec.partition(":")
    kind = _ALIASES.get(head, head)
    if kind == "graph_join":
        left, _, right = rest.partition("+")
        return graph_join(from_spec(left), from_spec(right))
    body, *opts = rest.split(";")
    options = dict(o.split("=", 1) for o in opts if o)
    try:
        if kind == "spherically_symmetric_tree":
            degrees = [int(t) for t in body.split(",") if t]
            return spherically_symmetric_tree(
                degrees, int(options.get("depth", DEFAULT_TREE_DEPTH)), int(options.get("tail", 1)))
        if kind == "star":
            vals = [float(t) for t in body.split(",") if t]
            if len(vals) == 1 and vals[0] == int(vals[0]) and "weighted" not in options:
                return star_graph(int(vals[0]))
            return star_graph(len(vals), vals)
        if kind == "sierpinski_gasket_graph":
            return sierpinski_gasket_graph(int(body))
        return generate(kind, n=int(body))
    except ValueError as exc:
        raise ParameterError(f"cannot parse graph spec {spec!r}: {exc}") from None


def subdivide_edges(g: WeightedGraph, k: int = 4) -> WeightedGraph:
    """Finite cable approximation: split each edge into ``k`` pieces.

    A piece of an edge with weight ``w`` and length ``l`` gets weight ``k w``
    and length ``l / k`` so series conductance and length are preserved.
    Original vertices keep their indices; new ones are appended edge by edge.
    """
    if k < 1:
        raise ParameterError("subdivision level must be >= 1")
    if k == 1:
        return WeightedGraph(g.n, g.edges, g.weights, g.lengths, g.root, g.labels)
    edges, weights, lengths = [], [], []
    nxt = g.n
    for (u, v), w, ell in zip(g.edges, g.weights, g.lengths):
        chain = [int(u)] + list(range(nxt, nxt + k - 1)) + [int(v)]
        nxt += k - 1
        for a, b in zip(chain[:-1], chain[1:]):
            edges.append((a, b))
            weights.append(k * w)
            lengths.append(ell / k)
    labels = list(g.labels) + [f"c{i}" for i in range(g.n, nxt)]
    return WeightedGraph(nxt, edges, weights, lengths, g.root, labels)


# ---------------------------------------------------------------------------
# file format
# ---------------------------------------------------------------------------

def format_graph(g: WeightedGraph) -> str:
    lines = [f"# root {g.labels[g.root]}"] + [f"v {label}" for label in g.labels]
    for (u, v), w, ell in zip(g.edges, g.weights, g.lengths):
        lines.append(f"e {g.labels[u]} {g.labels[v]} {float(w)!r} {float(ell)!r}")
    return "\n".join(lines) + "\n"


def write_graph(g: WeightedGraph, path) -> None:
    Path(path).write_text(format_graph(g))


def parse_graph(text: str) -> WeightedGraph:
    """Parse the ``v <id>`` / ``e <id1> <id2> <weight> <length>`` format.

    Vertex order follows the ``v`` lines; ``e`` lines may introduce unseen
    ids, which are appended.  Weight and length default to 1.  The first
    vertex is the root; ``# root <id>`` overrides it.
    """
    labels: list[str] = []
    index: dict[str, int] = {}
    edges, weights, lengths = [], [], []
    root_label = None

    def vid(tok):
        if tok not in index:
            index[tok] = len(labels)
            labels.append(tok)
        return index[tok]

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if len(parts) == 2 and parts[0] == "root":
                root_label = parts[1]
            continue
        parts = line.split()
        if parts[0] == "v" and len(parts) == 2:
            vid(parts[1])
        elif parts[0] == "e" and 3 <= len(parts) <= 5:
            try:
                w = float(parts[3]) if len(parts) > 3 else 1.0
                ell = float(parts[4]) if len(parts) > 4 else 1.0
            except ValueError:
                raise ParameterError(f"line {lineno}: bad number in {raw!r}") from None
            edges.append((vid(parts[1]), vid(parts[2])))
            weights.append(w)
            lengths.append(ell)
        else:
            raise ParameterError(f"line {lineno}: cannot parse {raw!r}")
    if not labels:
        raise ParameterError("empty graph file")
    if root_label is not None and root_label not in index:
        raise ParameterError(f"root {root_label!r} is not a vertex")
    root = index[root_label] if root_label is not None else 0
    return WeightedGraph(len(labels), edges, weights, lengths, root, labels)


def read_graph(path) -> WeightedGraph:
    return parse_graph(Path(path).read_text())


# ---------------------------------------------------------------------------
# nets and metric reports
# ---------------------------------------------------------------------------

def epsilon_net(g: WeightedGraph, eps: float, candidates=None, seeds=(),
                include_root: bool = True) -> np.ndarray:
    """Greedy maximal ``eps``-separated subset (pairwise ``d >= eps``).

    Scan order: ``seeds`` (kept in the given order), then the root (unless
    ``include_root`` is false), then the remaining candidates in ascending
    index.  Every candidate not selected lies at distance ``< eps`` from a
    selected point.  Seeds are assumed to be ``eps``-separated already.
    """
    if eps <= 0:
        raise ParameterError("eps must be positive")
    cand = np.arange(g.n) if candidates is None else as_index_array(candidates)
    order = [int(s) for s in seeds]
    if include_root and g.root in set(cand.tolist()) and g.root not in order:
        order.append(g.root)
    seen = set(order)
    order += [int(v) for v in cand if int(v) not in seen]
    chosen: list[int] = []
    covered = np.zeros(g.n, dtype=bool)
    for v in order:
        if covered[v]:
            continue
        chosen.append(v)
        covered |= g.distances_from(v) < eps - DIST_TOL
    return np.asarray(chosen, dtype=np.int64)


def check_net(g: WeightedGraph, net, eps: float, candidates=None) -> dict:
    """Exhaustive separation and covering check for a net."""
    net = np.asarray(net, dtype=np.int64)
    cand = np.arange(g.n) if candidates is None else as_index_array(candidates)
    dist = np.array([g.distances_from(v) for v in net])
    sub = dist[:, net]
    np.fill_diagonal(sub, np.inf)
    min_sep = float(sub.min()) if len(net) > 1 else math.inf
    cover = float(dist[:, cand].min(axis=0).max()) if len(cand) else 0.0
    return {
        "separated": min_sep >= eps - DIST_TOL,
        "covering": cover < eps - DIST_TOL or len(net) == len(cand),
        "min_separation": min_sep,
        "covering_radius": cover,
    }


def check_metric_axioms(dist: np.ndarray, tol: float = 1e-9) -> dict:
    """Exhaustive symmetry, identity and triangle checks on a distance matrix."""
    dist = np.asarray(dist, dtype=float)
    n = len(dist)
    sym = float(np.abs(dist - dist.T).max()) if n else 0.0
    diag = float(np.abs(np.diag(dist)).max()) if n else 0.0
    off = np.where(np.eye(n, dtype=bool), np.inf, dist)
    positive = bool(n < 2 or off.min() > 0)
    worst = 0.0
    witness = None
    for z in range(n):
        excess = dist - (dist[:, [z]] + dist[[z], :])
        i, j = np.unravel_index(np.argmax(excess), excess.shape)
        if excess[i, j] > worst:
            worst = float(excess[i, j])
            witness = (int(i), int(j), int(z))
    scale = max(1.0, float(dist.max()) if n else 1.0)
    return {
        "symmetric": sym <= tol * scale,
        "zero_diagonal": diag <= tol * scale,
        "positive_off_diagonal": positive,
        "triangle": worst <= tol * scale,
        "max_triangle_excess": worst,
        "triangle_witness": witness,
        "ok": sym <= tol * scale and diag <= tol * scale and positive and worst <= tol * scale,
    }


def _max_packing(dist_sub: np.ndarray, sep: float) -> tuple[int, bool]:
    """Largest subset with pairwise distance >= sep; (size, exact)."""
    k = len(dist_sub)
    conflict = (dist_sub < sep - DIST_TOL) & ~np.eye(k, dtype=bool)
    if k <= EXACT_PACKING_LIMIT:
        masks = [int(sum(1 << j for j in np.flatnonzero(conflict[i]))) for i in range(k)]
        best = 0
        for s in range(1 << k):
            size = bin(s).count("1")
            if size <= best:
                continue
            ok = True
            t = s
            while t:
                i = (t & -t).bit_length() - 1
                if masks[i] & s:
                    ok = False
                    break
                t &= t - 1
            if ok:
                best = size
        return best, True
    chosen: list[int] = []
    for i in range(k):
        if not any(conflict[i, j] for j in chosen):
            chosen.append(i)
    return len(chosen), False


def metric_doubling_report(g: WeightedGraph, radii: Sequence[float], centers=None) -> dict:
    """Packing counts ``M'(r)``: the most points of ``B(x, r)`` pairwise ``>= r/2`` apart.

    Exact (exhaustive) when the ball has at most :data:`EXACT_PACKING_LIMIT`
    points, otherwise a greedy lower bound with ``lower_bound_only`` set.
    """
    if any(r <= 0 for r in radii):
        raise ParameterError("radii must be positive")
    centers = range(g.n) if centers is None else centers
    rows = []
    for r in radii:
        best, best_x, exact_all = 0, None, True
        for x in centers:
            ball = g.ball(x, r)
            sub = g.distance_matrix[np.ix_(ball, ball)] if g.n <= ALL_PAIRS_CACHE_LIMIT else \
                np.array([g.distances_from(v)[ball] for v in ball])
            count, exact = _max_packing(sub, r / 2)
            exact_all &= exact
            if count > best:
                best, best_x = count, int(x)
        rows.append({"radius": float(r), "max_packing": best, "witness_center": best_x,
                     "lower_bound_only": not exact_all})
    counts = [row["max_packing"] for row in rows]
    growing = len(counts) > 1 and all(b > a for a, b in zip(counts, counts[1:]))
    return {"radii": rows, "max_packing": max(counts) if counts else 0,
            "non_doubling_suspect": growing}


def uniform_perfectness_report(g: WeightedGraph, C: float) -> dict:
    """Scan ``B(x, r) \\ B(x, r/C)`` over all ``x`` and dyadic ``r``.

    Radii are ``2^j * max_length`` for ``j >= 1`` up to the diameter; only
    pairs with ``X \\ B(x, r)`` nonempty are tested.  ``smallest_C`` is the
    least constant that would pass every tested pair.
    """
    if C <= 1:
        raise ParameterError("C must exceed 1")
    radii = []
    r = 2 * g.max_length
    while r <= g.diameter + g.max_length:
        radii.append(r)
        r *= 2
    worst_c, worst = 1.0, None
    failures = 0
    for x in range(g.n):
        d = g.distances_from(x)
        for r in radii:
            if not np.any(d >= r - DIST_TOL):
                continue
            inside = d[d < r - DIST_TOL]
            dmax = float(inside.max())
            need = math.inf if dmax == 0 else r / dmax
            if not np.any((d >= r / C - DIST_TOL) & (d < r - DIST_TOL)):
                failures += 1
            if need > worst_c:
                worst_c, worst = need, {"x": int(x), "r": float(r), "farthest_inside": dmax}
    return {"C": float(C), "pass": failures == 0, "failures": failures,
            "smallest_C": worst_c, "worst_annulus": worst, "radii": radii}


def controlled_weights_report(g: WeightedGraph) -> float:
    """``p0 = min_{x, y~x} w_xy / w_x``."""
    wx = g.vertex_weight
    u, v = g.edges[:, 0], g.edges[:, 1]
    if not g.num_edges:
        return 1.0
    return float(min((g.weights / wx[u]).min(), (g.weights / wx[v]).min()))


def metric_ball(dist_row: np.ndarray, r: float, closed: bool = False) -> np.ndarray:
    """Ball in an arbitrary metric given one row of its distance matrix."""
    mask = dist_row <= r + DIST_TOL if closed else dist_row < r - DIST_TOL
    return np.flatnonzero(mask)


def pairs_within(g: WeightedGraph, vertices, dmax: float, dmin: float = 0.0):
    """Index pairs ``(i, j)``, ``i < j``, with ``dmin < d <= dmax`` (lexicographic)."""
    verts = [int(v) for v in vertices]
    out = []
    for a, b in itertools.combinations(sorted(verts), 2):
        d = g.distances_from(a)[b]
        if dmin + DIST_TOL < d <= dmax + DIST_TOL:
            out.append((a, b))
    return out
