"""Ground states of the discrete p-Laplacian on lattices via the Nehari manifold method."""
from __future__ import annotations

from .domain import Domain, build_domain, edges, translate
from .energy import Problem, energy, minus_p_laplacian, pairing, residual, residual_norm
from .model import Potential, PowerNonlinearity, check_growth_conditions, critical_exponent
from .multiplicity import OrbitSet, find_distinct, orbit_distance
from .solver import (
    FiberDivergenceError,
    HypothesisError,
    SolverConfig,
    SolveResult,
    SolverError,
    fiber,
    fiber_slope,
    ground_state,
    project_nehari,
    sobolev_constant,
)
from .space import dirichlet_norm, e_norm, lq_norm
from .verify import run_suite

__version__ = "0.1.0"

__all__ = [
    "Domain", "build_domain", "edges", "translate",
    "Problem", "energy", "minus_p_laplacian", "pairing", "residual", "residual_norm",
    "Potential", "PowerNonlinearity", "check_growth_conditions", "critical_exponent",
    "OrbitSet", "find_distinct", "orbit_distance",
    "FiberDivergenceError", "HypothesisError", "SolverConfig", "SolveResult", "SolverError",
    "fiber", "fiber_slope", "ground_state", "project_nehari", "sobolev_constant",
    "dirichlet_norm", "e_norm", "lq_norm", "run_suite",
]
