"""Numerical lab for extremal-operator eigenvalues and robust growth-optimal trading."""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    ConvergenceError,
    DomainError,
    EvaluationError,
    IdentityViolation,
    InputError,
    InternalError,
    PositivityError,
    PucciLabError,
    ResolutionError,
    SaddleViolation,
)
from .pucci import (
    EllipticityPair,
    Spectrum,
    SymmetricMatrix,
    eig_sym,
    eval_F,
    extremal_coefficient,
    optimal_coefficient,
    pucci_minus,
    pucci_plus,
)
from .fields import (
    Ball,
    BoundFields,
    CovarianceField,
    ExhaustionFamily,
    FullLine,
    Grid,
    HalfLine,
    Interval,
    ScalarField,
    build_exhaustion,
    make_grid,
    matrix_to_radial_field,
    radial_to_matrix_field,
    sample_covariance,
    validate_covariance,
)
from .eigensolver import (
    EigenPair,
    HarnackReport,
    SolverConfig,
    apply_linear_operator,
    apply_pucci_operator,
    discrete_hessian,
    harnack_ratio,
    principal_eig_linear,
    principal_eig_pucci,
    solve_linear_dirichlet,
)
from .robust import (
    MinMaxReport,
    SelectionField,
    construct_selection,
    exhaustion_limit,
    grid_convergence_increment,
    verify_minmax,
)
from .simulate import (
    PathConfig,
    PathRecord,
    SaddleConfig,
    SaddleReport,
    StrategySpec,
    growth_rate,
    minmax_experiment,
    simulate_X,
    simulate_paths,
    wealth_path,
)
