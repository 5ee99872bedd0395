"""Hexahedral finite element solver on the unit cube."""
from .mesh import Mesh, build_mesh
from .element import shape, gauss_points
from .assembly import (assemble_external, assemble_internal, assemble_tangent,
                       apply_dirichlet)
from .solvers import (Solution, SolverConfig, solve, solve_first_order,
                      solve_linear, solve_newton, write_solution_csv)

__all__ = [
    "Mesh", "build_mesh", "shape", "gauss_points",
    "assemble_external", "assemble_internal", "assemble_tangent", "apply_dirichlet",
    "Solution", "SolverConfig", "solve", "solve_first_order", "solve_linear",
    "solve_newton", "write_solution_csv",
]
