"""High-order (p-version) finite elements for the Cahn-Hilliard equation."""
from .assembly import Discretization, discretize
from .chsolver import SolverConfig, State, Trajectory, advance, evolve, find_stationary, initial_state
from .eigen import EigenPair, smallest_eigenpairs
from .energy_models import (EnergyModel, critical_points, logarithmic_model, quartic_model,
                            scaled_quartic_model, tanh_profile, taylor_model)
from .errors import (ChpfemError, DomainError, FitError, GeometryError, MeshParseError,
                     NonConvergenceError, NumericError, ParameterError, ShapeError)
from .mesh import Mesh, import_quad_mesh, make_mapped_quad_mesh, make_rect_mesh, make_segment_mesh
from .ref_element import build_basis

__version__ = "0.1.0"

__all__ = [
    "Discretization", "discretize", "SolverConfig", "State", "Trajectory", "advance", "evolve",
    "find_stationary", "initial_state", "EigenPair", "smallest_eigenpairs", "EnergyModel",
    "critical_points", "logarithmic_model", "quartic_model", "scaled_quartic_model", "tanh_profile",
    "taylor_model", "ChpfemError", "DomainError", "FitError", "GeometryError", "MeshParseError",
    "NonConvergenceError", "NumericError", "ParameterError", "ShapeError", "Mesh",
    "import_quad_mesh", "make_mapped_quad_mesh", "make_rect_mesh", "make_segment_mesh",
    "build_basis",
]
