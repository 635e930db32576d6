"""Rearrangements, isoperimetric profiles, and pointwise inequality checks
on discretized measure spaces."""

from .config import ConfigError, RunConfig
from .corpus import FAMILIES, CorpusMember, TestCorpus
from .exprs import Expression, ExpressionError, grid_function_from_expression, parse_expression
from .gradient import (
    ModulusTable,
    PerimeterEstimate,
    gradient_modulus,
    isoperimetric_check,
    kth_derivative_modulus,
    minkowski_content,
    modulus_of_continuity,
)
from .inequalities import (
    hardy_operator,
    morrey_holder_check,
    poincare_chain_check,
    poincare_identity_check,
    snapped_tgrid,
    truncation_identity_check,
    verify_bobkov_houdre,
    verify_coulhon,
    verify_coulhon_pointwise,
    verify_garsia,
    verify_higher_order,
    verify_mazya_talenti,
    verify_oscillation,
    verify_oscillation_modulus,
    verify_polya_szego,
    verify_self_improvement,
    verify_transference,
)
from .measure import (
    EuclideanBox,
    GaussianLine,
    GridFunction,
    StepFunction,
    UnitCube,
    WeightedInterval,
    decreasing_rearrangement,
    distribution_function,
    maximal_average,
    oscillation,
    signed_rearrangement,
    space_from_dict,
)
from .norms import (
    NormDescriptor,
    classical_linf_q_diverges,
    evaluate,
    fundamental_function,
    lorentz_oscillation,
    parse_norm,
)
from .profiles import (
    Profile,
    constant_profile,
    cube_profile,
    euclidean_profile,
    gamma_transference_constant,
    gaussian_equivalence_constants,
    gaussian_profile,
    gaussian_type_check,
    phi_of,
    profile_from_dict,
    relative_min_profile,
    restricted_profile,
)
from .reports import (
    Verdict,
    VerificationReport,
    empirical_constant,
    json_dumps,
    summary_csv,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "RunConfig",
    "FAMILIES", "CorpusMember", "TestCorpus",
    "Expression", "ExpressionError", "grid_function_from_expression",
    "parse_expression",
    "ModulusTable", "PerimeterEstimate", "gradient_modulus",
    "isoperimetric_check", "kth_derivative_modulus", "minkowski_content",
    "modulus_of_continuity",
    "hardy_operator", "morrey_holder_check", "poincare_chain_check",
    "poincare_identity_check", "snapped_tgrid", "truncation_identity_check",
    "verify_bobkov_houdre", "verify_coulhon", "verify_coulhon_pointwise",
    "verify_garsia", "verify_higher_order", "verify_mazya_talenti",
    "verify_oscillation", "verify_oscillation_modulus", "verify_polya_szego",
    "verify_self_improvement", "verify_transference",
    "EuclideanBox", "GaussianLine", "GridFunction", "StepFunction",
    "UnitCube", "WeightedInterval", "decreasing_rearrangement",
    "distribution_function", "maximal_average", "oscillation",
    "signed_rearrangement", "space_from_dict",
    "NormDescriptor", "classical_linf_q_diverges", "evaluate",
    "fundamental_function", "lorentz_oscillation", "parse_norm",
    "Profile", "constant_profile", "cube_profile", "euclidean_profile",
    "gamma_transference_constant", "gaussian_equivalence_constants",
    "gaussian_profile", "gaussian_type_check", "phi_of", "profile_from_dict",
    "relative_min_profile", "restricted_profile",
    "Verdict", "VerificationReport", "empirical_constant", "json_dumps",
    "summary_csv",
]
