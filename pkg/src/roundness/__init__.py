"""Numerical moduli of roundness, smoothness and convexity for finite-dimensional
normed spaces, generalised roundness of finite metric spaces, and checks on
Orlicz functions."""

from .errors import (
    CostGuardError,
    EvaluationError,
    InvalidParameterError,
    InvalidT0Error,
    MetricValidationError,
    NonIntegrableError,
    RoundnessError,
    ShapeError,
    SpecParseError,
)
from .metric import (
    FiniteMetricSpace,
    MgrResult,
    PMatrix,
    gr_bruteforce,
    p_matrix,
    read_metric_csv,
    roundness_defect,
    roundness_profile,
    sanchez_mgr,
    validate_metric,
)
from .moduli import (
    AtLeast,
    Bracket,
    FrechetResult,
    ModulusSample,
    clarkson_ratio,
    delta_estimate,
    duality_gap,
    frechet_exponent,
    log_convexity_check,
    mc_estimate,
    mr_estimate,
    nu_estimate,
    rho_estimate,
)
from .orlicz import (
    OrliczFunction,
    delta2_index,
    phi_example1,
    phi_example2,
    phi_from_psi,
    psi_example1,
    smoothness_ratio_sup,
    sqrt_convexity_check,
    supermult_check,
)
from .search import SearchBudget
from .spaces import (
    SpaceSpec,
    dual_norm_2d,
    lp,
    lplq,
    luxemburg_norm,
    numerical_dual,
    orlicz_space,
    racetrack,
    racetrack_dual,
    schatten,
)
from .specio import dump_spec, parse_spec

__version__ = "0.1.0"
