"""The graph Dirichlet form, Dirichlet problems, Green and Poisson kernels.

Green kernels are normalized against counting measure, i.e. ``g_D`` is the
inverse of the conductance Laplacian restricted to ``D``.  Changing the
vertex measure changes the generator but not this kernel.
"""

from __future__ import annotations

from functools import cached_property

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import HarnackLabError, ParameterError, TopologyError
from .graph_core import WeightedGraph, as_index_array

RESIDUAL_TOL = 1e-10
DENSE_EIG_LIMIT = 2500


def energy(g: WeightedGraph, f, h=None) -> float:
    """``E(f, h) = sum_edges w_e (f(u)-f(v)) (h(u)-h(v))``; ``h`` defaults to ``f``."""
    f = np.asarray(f, dtype=float)
    u, v = g.edges[:, 0], g.edges[:, 1]
    df = f[u] - f[v]
    dh = df if h is None else np.asarray(h, dtype=float)[u] - np.asarray(h, dtype=float)[v]
    return float(np.dot(g.weights, df * dh))


def gamma_measure(g: WeightedGraph, f) -> np.ndarray:
    """Energy density ``gamma_f(x) = 1/2 sum_y w_xy (f(x)-f(y))^2``; sums to ``E(f,f)``."""
    f = np.asarray(f, dtype=float)
    u, v = g.edges[:, 0], g.edges[:, 1]
    half = 0.5 * g.weights * (f[u] - f[v]) ** 2
    out = np.zeros(g.n)
    np.add.at(out, u, half)
    np.add.at(out, v, half)
    return out


def check_measure(g: WeightedGraph, m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.shape != (g.n,):
        raise ParameterError("measure must assign a mass to every vertex")
    if not np.all(m > 0) or not np.all(np.isfinite(m)):
        raise ParameterError("measure must be strictly positive and finite")
    return m


class DomainProblem:
    """Dirichlet Laplacian of a vertex set ``D`` with its outer boundary.

    The restricted Laplacian ``L_D`` is factorized once (sparse LU); the
    object is read-only afterwards.

    Parameters
    ----------
    g : WeightedGraph
    domain : iterable of int
        Vertex set ``D``; must be nonempty with a nonempty outer boundary.
    """

    def __init__(self, g: WeightedGraph, domain):
        self.graph = g
        self.domain = as_index_array(domain)
        if len(self.domain) == 0:
            raise ParameterError("domain is empty")
        self.boundary = g.boundary(self.domain)
        if len(self.boundary) == 0:
            raise TopologyError("domain has empty boundary (it is the whole graph)")
        self.position = np.full(g.n, -1, dtype=np.int64)
        self.position[self.domain] = np.arange(len(self.domain))
        self.bposition = np.full(g.n, -1, dtype=np.int64)
        self.bposition[self.boundary] = np.arange(len(self.boundary))
        lap = g.laplacian
        self.L_D = lap[self.domain][:, self.domain].tocsc()
        self.W_DB = g.adjacency[self.domain][:, self.boundary].tocsr()
        self._lu = spla.splu(self.L_D)

    @property
    def size(self) -> int:
        return len(self.domain)

    def contains(self, vertices) -> bool:
        return bool(np.all(self.position[np.atleast_1d(vertices)] >= 0))

    def solve(self, rhs) -> np.ndarray:
        """Solve ``L_D x = rhs`` for a vector (or matrix) indexed by ``D``."""
        rhs = np.asarray(rhs, dtype=float)
        x = self._lu.solve(rhs)
        if not np.all(np.isfinite(x)):
            raise TopologyError("singular Dirichlet system")
        return x

    @cached_property
    def green_matrix(self) -> np.ndarray:
        """Dense ``g_D`` on ``D x D`` (symmetrized; read-only)."""
        gm = self.solve(np.eye(self.size))
        gm = 0.5 * (gm + gm.T)
        gm.setflags(write=False)
        return gm

    def green_column(self, x: int) -> np.ndarray:
        """``g_D(x, .)`` as a length-``|D|`` vector without forming the full kernel."""
        e = np.zeros(self.size)
        e[self.position[x]] = 1.0
        return self.solve(e)

    def green(self, x: int, y: int) -> float:
        return float(self.green_matrix[self.position[x], self.position[y]])

    @cached_property
    def harmonic_measure_matrix(self) -> np.ndarray:
        """``K(x, b)`` for ``x`` in ``D``, ``b`` in the boundary (rows sum to 1)."""
        k = self.solve(self.W_DB.toarray())
        k = np.atleast_2d(k.reshape(self.size, len(self.boundary)))
        k.setflags(write=False)
        return k

    def residual(self, h_full: np.ndarray) -> float:
        """Relative residual of harmonicity on ``D`` for a full-length vector."""
        hd = h_full[self.domain]
        hb = h_full[self.boundary]
        rhs = self.W_DB @ hb
        res = self.L_D @ hd - rhs
        scale = max(np.abs(rhs).max(), np.abs(self.L_D @ hd).max(), 1e-300)
        return float(np.abs(res).max() / scale) if np.any(hd) or np.any(rhs) else 0.0


def domain_problem(g: WeightedGraph, domain) -> DomainProblem:
    return DomainProblem(g, domain)


def _boundary_vector(dp: DomainProblem, data) -> np.ndarray:
    g = dp.graph
    if isinstance(data, dict):
        out = np.zeros(len(dp.boundary))
        for v, val in data.items():
            if dp.bposition[int(v)] < 0:
                raise ParameterError(f"vertex {v} is not on the boundary")
            out[dp.bposition[int(v)]] = float(val)
        return out
    arr = np.asarray(data, dtype=float)
    if np.ndim(arr) == 0:
        return np.full(len(dp.boundary), float(arr))
    if arr.shape == (g.n,):
        return arr[dp.boundary]
    if arr.shape == (len(dp.boundary),):
        return arr
    raise ParameterError("boundary data must be scalar, per-boundary, per-vertex or a dict")


def solve_dirichlet(dp: DomainProblem, boundary_data, return_residual: bool = False):
    """Harmonic extension of boundary data into ``D``.

    Returns a length-``n`` vector holding the solution on ``D``, the data on
    the boundary and ``nan`` elsewhere.
    """
    b = _boundary_vector(dp, boundary_data)
    h = np.full(dp.graph.n, np.nan)
    h[dp.boundary] = b
    h[dp.domain] = dp.solve(dp.W_DB @ b)
    res = dp.residual(np.nan_to_num(h))
    if res > RESIDUAL_TOL:
        raise HarnackLabError(f"Dirichlet solve residual {res:.3e} exceeds {RESIDUAL_TOL}")
    return (h, res) if return_residual else h


def greens_function(dp: DomainProblem) -> np.ndarray:
    return dp.green_matrix


def harmonic_measure(dp: DomainProblem) -> np.ndarray:
    return dp.harmonic_measure_matrix


def lambda_min(dp: DomainProblem, m) -> float:
    """Smallest ``lambda`` with ``L_D v = lambda diag(m_D) v``."""
    m = check_measure(dp.graph, m)[dp.domain]
    if dp.size <= DENSE_EIG_LIMIT:
        vals = sla.eigh(dp.L_D.toarray(), np.diag(m), eigvals_only=True, subset_by_index=[0, 0])
        return float(vals[0])
    vals = spla.eigsh(dp.L_D, k=1, M=sp.diags(m).tocsc(), sigma=0, which="LM",
                      return_eigenvectors=False)
    return float(vals.min())


def neumann_laplacian(g: WeightedGraph, vertices) -> sp.csr_matrix:
    """Laplacian of the subgraph induced on ``vertices`` (edges leaving the set dropped)."""
    verts = as_index_array(vertices)
    w = g.adjacency[verts][:, verts].tocsr()
    deg = np.asarray(w.sum(axis=1)).ravel()
    return (sp.diags(deg) - w).tocsr()


def induced_energy(g: WeightedGraph, vertices, f) -> float:
    """Energy of ``f`` counting only edges with both endpoints in ``vertices``."""
    inside = np.zeros(g.n, dtype=bool)
    inside[as_index_array(vertices)] = True
    keep = inside[g.edges[:, 0]] & inside[g.edges[:, 1]]
    f = np.asarray(f, dtype=float)
    u, v = g.edges[keep, 0], g.edges[keep, 1]
    return float(np.dot(g.weights[keep], (f[u] - f[v]) ** 2))
