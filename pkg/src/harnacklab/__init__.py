"""Discrete potential theory and elliptic Harnack workbench for weighted graphs."""

__version__ = "0.1.0"

from .dirichlet import DomainProblem, energy, gamma_measure, solve_dirichlet  # noqa: E402
from .errors import (ConstructionError, ContainmentError, HarnackLabError, OverlapError,  # noqa: E402
                     ParameterError, PreconditionError, ShellError, TopologyError)
from .graph_core import WeightedGraph, from_spec, generate, read_graph, write_graph  # noqa: E402
from .harnack import ehi_profile, harnack_constant  # noqa: E402
from .potential import capacity, hitting_probability, neumann_capacity  # noqa: E402

__all__ = [
    "__version__", "WeightedGraph", "from_spec", "generate", "read_graph", "write_graph",
    "DomainProblem", "energy", "gamma_measure", "solve_dirichlet", "capacity",
    "hitting_probability", "neumann_capacity", "harnack_constant", "ehi_profile",
    "HarnackLabError", "PreconditionError", "ParameterError", "TopologyError",
    "ContainmentError", "OverlapError", "ShellError", "ConstructionError",
]
