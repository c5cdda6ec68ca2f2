"""Conservation-law-preserving finite difference solvers and benchmarks."""

from .stencil import (GridSpec1D, GridSpec2D, StencilOperator, apply_op,
                      assemble_matrix, compose, make_dm, make_dmc, make_mum,
                      make_shift)
from .integrators import (MassODE, NewtonError, NewtonOptions, newton_solve,
                          step_avf2, step_epcm4, step_gauss4, step_midpoint)
from .boussinesq import (BoussinesqParams, build_ec2, build_ec4, build_family,
                         build_mc2, build_mc4, density, global_invariant)
from .diagnostics import (RunReport, err_alpha, order_estimate,
                          rel_solution_error, write_profile, write_report,
                          write_series)
from .run import run_soliton

__version__ = "0.1.0"
