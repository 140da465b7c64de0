"""Numerical laboratory for the degenerate evolution u_t = |Du|^(h-3) <D^2u Du, Du>,
h > 1: exact solution families, regularized finite-difference solvers (radial
and d-dimensional), and a large-time asymptotics harness.
"""

__version__ = "0.1.0"

from .operator import (Homogeneity, Source, eval_operator, eval_regularized,
                       regularized_matrix, source_term)
from .exact import (Barenblatt, BlowUp, FriendlyGiant, GiantProfile,
                    TravelingWave, build_giant_profile, dump_profile_csv,
                    giant_half_period, rescaled_solution, residual_at)
from .radial import (RadialProfile, cfl_dt, radial_evolve, radial_step,
                     sample_radial, slope_flux)
from .grid import (Field, Grid, NumericalAbort, SchemeParams, ball_grid,
                   box_grid, field_from, grid_cfl_dt, grid_evolve,
                   grid_gradient, grid_operator, grid_step, smooth_cutoff,
                   truncate_unbounded)
from .asymptotics import (BarenblattFit, GiantExtract, RateFit, TimeSeries,
                          aleksandrov_gap, benilan_crandall_violation,
                          dirichlet_rescale, eigen_residual_grid,
                          eigen_residual_radial, extract_giant, fit_barenblatt,
                          fit_decay_exponent, interp_at, rescale_cauchy,
                          scaled_monotonicity_defect, support_radius)

__all__ = [name for name in dir() if not name.startswith("_")]
