"""Pseudo-Gaussian quantum models: potentials, matrix elements, spectra.

The package builds the family of one-dimensional potentials that decay
like a Gaussian yet follow the harmonic oscillator near the origin,
computes Hamiltonian matrix elements in the oscillator energy basis from
generating functionals, and extracts bound-state spectra from truncated
blocks, with quadrature and finite-difference oracles for validation.
"""

from .errors import (
    ConfigError,
    EigenSolveError,
    NumericalError,
    OracleMismatchError,
    PgmError,
    QuadratureConvergenceError,
    SeriesDegreeError,
)
from .model import (
    ModelParams,
    PhysicalScales,
    compute_coefficients,
    potential_dimensionless,
    potential_minimum,
    potential_physical,
    taylor_remainder,
)
from .oracles import (
    FiniteDifferenceGrid,
    QuadratureGrid,
    fd_bound_states,
    fd_bound_states_refined,
    gauss_hermite_grid,
    hermite_u,
    hermite_u_table,
    kinetic_element_exact,
    kinetic_matrix_exact,
    quad_element_potential,
    quad_potential_block,
)
from .series import (
    BivariateSeries,
    FunctionalAssembly,
    MuJet,
    assemble_Z,
    extract_element,
    extraction_factor,
    gaussian_functional,
    gaussian_functional_jet,
    highprec_block,
    ho_functional,
    kinetic_functional,
    series_exp_neg_a_square,
    series_from_exp_bilinear,
    series_mul,
)
from .spectral import (
    BOUND_THRESHOLD,
    ConvergenceReport,
    LevelTrack,
    MatrixBlock,
    SpectrumResult,
    assemble_matrix,
    classify_bound,
    convergence_scan,
    eigen_sym,
    inflexion_scan,
)

__version__ = "0.1.0"

__all__ = [
    "ModelParams",
    "PhysicalScales",
    "compute_coefficients",
    "potential_dimensionless",
    "potential_physical",
    "potential_minimum",
    "taylor_remainder",
    "BivariateSeries",
    "MuJet",
    "FunctionalAssembly",
    "series_from_exp_bilinear",
    "series_exp_neg_a_square",
    "series_mul",
    "kinetic_functional",
    "gaussian_functional",
    "gaussian_functional_jet",
    "ho_functional",
    "assemble_Z",
    "extraction_factor",
    "extract_element",
    "highprec_block",
    "hermite_u",
    "hermite_u_table",
    "QuadratureGrid",
    "gauss_hermite_grid",
    "quad_element_potential",
    "quad_potential_block",
    "kinetic_element_exact",
    "kinetic_matrix_exact",
    "FiniteDifferenceGrid",
    "fd_bound_states",
    "fd_bound_states_refined",
    "MatrixBlock",
    "SpectrumResult",
    "LevelTrack",
    "ConvergenceReport",
    "assemble_matrix",
    "eigen_sym",
    "classify_bound",
    "convergence_scan",
    "inflexion_scan",
    "BOUND_THRESHOLD",
    "PgmError",
    "ConfigError",
    "NumericalError",
    "SeriesDegreeError",
    "QuadratureConvergenceError",
    "EigenSolveError",
    "OracleMismatchError",
]
