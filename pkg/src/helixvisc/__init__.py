"""helixvisc: a pseudo-spectral laboratory for helically symmetric
incompressible flow and its vanishing-viscosity limit."""

__version__ = "0.1.0"

from .grid import Grid3, ScalarField, VectorField3, transform
from .helical import (HelicalityReport, SwirlDecomposition, apply_S_theta,
                      curl_structure, decompose, helicality_report, swirl, xi)
from .mollifier import MollifierConfig, mollify, verify_symmetry_commutation
from .reduction import TraceField2, lift, norm_correspondence, read_trace, trace, write_trace
from .solver import (DiagnosticsRecord, HelicalState, SolverConfig, run, step,
                     step_regularized, swirl_equation_residual,
                     omega3_equation_residual)
from .spectral import NormReport, dealias, derivative, leray_project, norms
from .experiments import (SweepConfig, SweepResult, build_initial_data, export,
                          fit_scaling, run_sweep)
