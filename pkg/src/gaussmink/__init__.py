"""Numerical tools for the planar L_p Gaussian Minkowski problem."""

from .circle_grid import Grid, ScalarField, differentiate, field, integrate, resample
from .continuation import (HomotopyConfig, SolveReport, constant_solution, constant_spectrum,
                           continuation_solve, linearized_apply, residual, uniqueness_probe)
from .convex_body import (Body, ball, body_from_support, boundary_point, convex_hull_body,
                          hausdorff_distance, polar_body, radial_from_support, scale_body,
                          symmetrize, wulff_shape)
from .errors import GaussMinkError
from .gauss_measure import (gaussian_volume, isoperimetric_deficit, lp_density, lp_total,
                            lp_total_boundary_oracle, psi, upsilon, upsilon_inverse)
from .variational import (MeasureDensity, VariationalOptions, VariationalReport, functional_E,
                          functional_J, rescale_to_half, variational_solve)

__version__ = "0.1.0"

__all__ = [
    "Grid", "ScalarField", "differentiate", "field", "integrate", "resample",
    "HomotopyConfig", "SolveReport", "constant_solution", "constant_spectrum",
    "continuation_solve", "linearized_apply", "residual", "uniqueness_probe",
    "Body", "ball", "body_from_support", "boundary_point", "convex_hull_body",
    "hausdorff_distance", "polar_body", "radial_from_support", "scale_body", "symmetrize",
    "wulff_shape", "GaussMinkError", "gaussian_volume", "isoperimetric_deficit",
    "lp_density", "lp_total", "lp_total_boundary_oracle", "psi", "upsilon",
    "upsilon_inverse", "MeasureDensity", "VariationalOptions", "VariationalReport",
    "functional_E", "functional_J", "rescale_to_half", "variational_solve",
]
