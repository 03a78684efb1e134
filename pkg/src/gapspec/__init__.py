"""Pollution-free eigenvalue enclosures in spectral gaps via the quadratic projection method."""

__version__ = "0.1.0"

from .enclosure import (EnclosureInterval, enclosure_interval, minimal_delta,
                        nonpollution_check, weak_interval)
from .errors import (AssemblyError, CertificationError, ConvergenceError,
                     DegenerateBasisError, GapspecError, SolverError)
from .models import (LAMBDA_MINUS, LAMBDA_PLUS, CaseStudyModel, DiagonalModel, OperatorModel,
                     SpectrumDescription, case_study_entry, diagonal_model,
                     exact_spectrum_case_study, model_from_name, quadrature_entry)
from .pencil import (BasisSpec, QuadraticPencil, assemble_pencil, beta, evaluate,
                     least_singular_value)
from .perturbation import (MonteCarloReport, PerturbationSpec, fit_loglog_slope, monte_carlo,
                           norm_sharpness_witness, perturb, solve_galerkin)
from .pseudospectrum import (GridField, annulus_clearance, grid_eval,
                             in_structured_pseudospectrum, structured_witness)
from .qep import RootSet, closest_root, solve_quadratic
