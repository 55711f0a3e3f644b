"""Numerical lab for the overdetermined torsion problem on annuli and their perturbations."""

from .bifurcation import BracketError, bifurcation_table, find_lambda_star
from .cheeger import cheeger_report, gradient_bound_check, perimeter_area
from .collocation import (
    FourierPerturbation,
    build_grid,
    evaluate_F,
    linearization_fd,
    solve_dirichlet,
)
from .continuation import (
    ContinuationError,
    continue_branch,
    newton_solve_branch_point,
    verify_overdetermined,
)
from .modes import eigen_branch_table, eigen_closed_form, eigen_direct, mode_matrix
from .radial import ProblemParams, boundary_data, u_radial

__all__ = [
    "BracketError",
    "ContinuationError",
    "FourierPerturbation",
    "ProblemParams",
    "bifurcation_table",
    "boundary_data",
    "build_grid",
    "cheeger_report",
    "continue_branch",
    "eigen_branch_table",
    "eigen_closed_form",
    "eigen_direct",
    "evaluate_F",
    "find_lambda_star",
    "gradient_bound_check",
    "linearization_fd",
    "mode_matrix",
    "newton_solve_branch_point",
    "perimeter_area",
    "solve_dirichlet",
    "u_radial",
    "verify_overdetermined",
]
