"""Numerical laboratory for the Laplacian on thin curved planar strips.

The package discretizes the Dirichlet/Neumann/Robin Laplacian on a
curvilinear strip of width eps around a curve of signed curvature
kappa(s), computes low spectra with certified residuals, and runs the
eps-sweeps that exhibit the two-term eigenvalue asymptotics, the 1D
comparison operators, and the norm gap between shifted inverse
operators.
"""

__version__ = "0.1.0"

from .geometry import (SAFETY, CurvatureProfile, EmbeddedStrip, Interval,
                       StripProblem, ValidityReport, custom_profile, embed,
                       make_profile, parse_profile, require_admissible,
                       validate)
from .coefficients import (CoefficientPoint, EffectivePotential,
                           effective_potential, jacobian_h, overlap_a,
                           potentials, transverse_mode)
from .discretize import (BoundaryConditionSet, GeneralizedPencil, TensorGrid,
                         assemble_1d, assemble_flat, assemble_reference,
                         assemble_transverse, assemble_weighted, bc_of,
                         build_grid, export_pencil)
from .eigensolve import (BandedFactorization, NonConvergenceError,
                         ShiftBreakdownError, Spectrum, count_below,
                         ldlt_banded, operator_gap_norm, smallest_eigenpairs)
from .analysis import (BoundednessVerdict, DirichletTable, FitResult,
                       ResolventGap, ResolventSweep, SweepRecord, SweepResult,
                       Thm2Table, annulus_oracle, bessel_first_zero,
                       certified_1d_eigenvalues, certified_strip_eigenvalues,
                       check_thm2, count_bound_states, dirichlet_compare,
                       resolvent_gap_sweep, robin_sweep, strip_spectrum,
                       sweep_thm1, threshold, transverse_nu, truncation_shift,
                       write_summary_json, write_sweep_csv)

__all__ = [
    "__version__",
    # geometry
    "SAFETY", "CurvatureProfile", "EmbeddedStrip", "Interval", "StripProblem",
    "ValidityReport", "custom_profile", "embed", "make_profile",
    "parse_profile", "require_admissible", "validate",
    # coefficients
    "CoefficientPoint", "EffectivePotential", "effective_potential",
    "jacobian_h", "overlap_a", "potentials", "transverse_mode",
    # discretize
    "BoundaryConditionSet", "GeneralizedPencil", "TensorGrid", "assemble_1d",
    "assemble_flat", "assemble_reference", "assemble_transverse",
    "assemble_weighted", "bc_of", "build_grid", "export_pencil",
    # eigensolve
    "BandedFactorization", "NonConvergenceError", "ShiftBreakdownError",
    "Spectrum", "count_below", "ldlt_banded", "operator_gap_norm",
    "smallest_eigenpairs",
    # analysis
    "BoundednessVerdict", "DirichletTable", "FitResult", "ResolventGap",
    "ResolventSweep", "SweepRecord", "SweepResult", "Thm2Table",
    "annulus_oracle", "bessel_first_zero", "certified_1d_eigenvalues",
    "certified_strip_eigenvalues", "check_thm2", "count_bound_states",
    "dirichlet_compare", "resolvent_gap_sweep", "robin_sweep",
    "strip_spectrum", "sweep_thm1", "threshold", "transverse_nu",
    "truncation_shift", "write_summary_json", "write_sweep_csv",
]
