"""Polarization, Schwarz symmetrization and symmetric constrained minimizers
on uniform box grids."""

from .grid import (GridSpec, MultiField, ScalarField, distribution_function,
                   gradient_magnitude, lp_norm, make_grid, read_field,
                   write_field)
from .rearrange import (ConvergenceTrace, HalfSpace, PolarizationSchedule,
                        admissible_half_spaces, iterate_polarizations,
                        polarize, polarize_multi, reflect, schwarz,
                        schwarz_multi, symmetry_deficit)
from .energy import (AssumptionReport, CouplingG, EnergyModel, IntegrandJ,
                     KernelV, LocalTermF, check_assumptions, eval_E1, eval_E2,
                     eval_E3, eval_total, nonlocal_quadratic, sample_kernel)
from .minimize import (ConstraintVector, MinimizeConfig, MinimizeResult,
                       descent_step, dilate, dilation_scan, discrete_gradient,
                       lagrange_residual, minimize, project_constraints,
                       symmetry_report)
from .verify import (InequalityReport, TailProfile,
                     check_local_monotonicity, check_nonlocal_monotonicity,
                     check_polarization_invariance, check_polya_szego,
                     equiintegrability_profile, random_bump_field,
                     run_property_suite)
from . import models

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
