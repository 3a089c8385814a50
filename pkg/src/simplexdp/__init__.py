"""Differentially private release of simplex-valued data with the Dirichlet mechanism.

Counting queries and Markov-chain transition matrices are privatized by
releasing Dirichlet draws centred on the sensitive values. The package computes
certified (epsilon, delta) guarantees, calibrates the concentration parameter
to a target epsilon, and reports analytic accuracy and perturbation bounds.
"""

from .accuracy import (
    AccuracyReport,
    ZetaHelper,
    accuracy_report,
    coord_error_bounds,
    coord_error_moments,
    expected_kl_bound,
    expected_kl_exact,
    expected_l1_bound,
    kl_divergence,
    markov_expected_kl,
    markov_kl_bound,
)
from .data import (
    CategorySet,
    ChainDiagnostics,
    CountVector,
    EventLog,
    TransitionCounts,
    count_query,
    merge_categories,
    merge_partitions,
    transition_counts,
    validate_chain_structure,
)
from .dirichlet import DirichletParams, RngSeed, log_density, sample, sample_batch
from .errors import (
    AdmissionError,
    AssumptionError,
    BoundarySampleWarning,
    CalibrationError,
    ConditioningError,
    DomainError,
    MappingError,
    ShapeError,
    SimplexDPError,
    StructureError,
    UnsupportedError,
    ValidationError,
    ZeroCountWarning,
)
from .markov import (
    PerturbationBounds,
    TransitionModel,
    fundamental_matrix,
    perturbation_bounds,
    stationary_distribution,
    tau_inf,
    tau_inf_bruteforce,
    tv_distance,
)
from .privacy import (
    DeltaEstimate,
    MechanismConfig,
    Omega1Spec,
    PrivacyBudget,
    calibrate_k,
    chain_configs,
    compose_parallel,
    config_for,
    delta_bound,
    epsilon_bound,
    extreme_points,
    min_epsilon,
    min_k,
    omega1_probability_mc,
    omega1_probability_quadrature,
    privatize_chain,
    privatize_vector,
    row_budgets,
)
from .specfun import digamma, log_beta, log_gamma, log_multivariate_beta, trigamma

__version__ = "0.1.0"

__all__ = [
    "accuracy_report",
    "AccuracyReport",
    "AdmissionError",
    "AssumptionError",
    "BoundarySampleWarning",
    "calibrate_k",
    "CalibrationError",
    "CategorySet",
    "chain_configs",
    "ChainDiagnostics",
    "compose_parallel",
    "ConditioningError",
    "config_for",
    "coord_error_bounds",
    "coord_error_moments",
    "count_query",
    "CountVector",
    "delta_bound",
    "DeltaEstimate",
    "digamma",
    "DirichletParams",
    "DomainError",
    "epsilon_bound",
    "EventLog",
    "expected_kl_bound",
    "expected_kl_exact",
    "expected_l1_bound",
    "extreme_points",
    "fundamental_matrix",
    "kl_divergence",
    "log_beta",
    "log_density",
    "log_gamma",
    "log_multivariate_beta",
    "MappingError",
    "markov_expected_kl",
    "markov_kl_bound",
    "MechanismConfig",
    "merge_categories",
    "merge_partitions",
    "min_epsilon",
    "min_k",
    "omega1_probability_mc",
    "omega1_probability_quadrature",
    "Omega1Spec",
    "perturbation_bounds",
    "PerturbationBounds",
    "PrivacyBudget",
    "privatize_chain",
    "privatize_vector",
    "RngSeed",
    "row_budgets",
    "sample",
    "sample_batch",
    "ShapeError",
    "SimplexDPError",
    "stationary_distribution",
    "StructureError",
    "tau_inf",
    "tau_inf_bruteforce",
    "transition_counts",
    "TransitionCounts",
    "TransitionModel",
    "trigamma",
    "tv_distance",
    "UnsupportedError",
    "validate_chain_structure",
    "ValidationError",
    "ZeroCountWarning",
    "ZetaHelper",
]
