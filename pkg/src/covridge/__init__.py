"""Covariance-ridge permutation ranking for Markov boundary recovery.

Shrink the explanatory covariance, whiten, fit a ridge-penalized linear
model with a cross-validated penalty, and attach permutation p-values to
every variable. Includes synthetic generators with known boundaries and an
evaluation harness for replicated benchmarks.
"""

__version__ = "0.1.0"

from .covmat import (
    CovarianceEstimate,
    SampleMatrix,
    inverse_sqrt,
    lw_shrink,
    min_eigenvalue,
    sample_covariance,
)
from .crp import CrpConfig, CrpReport, crp_run, default_lambda_grid
from .errors import (
    CovridgeError,
    DataError,
    DegenerateDataError,
    NumericalError,
    UsageError,
)
from .evalharness import (
    AggregateSummary,
    EvalSummary,
    aggregate_replicates,
    evaluate_ranking,
    rank_histogram,
)
from .fileio import (
    bn_model_from_dict,
    bn_model_to_dict,
    build_manifest,
    canonical_dumps,
    read_csv,
    read_json,
    report_from_dict,
    report_to_dict,
    sem_model_from_dict,
    sem_model_to_dict,
    sha256_file,
    truth_from_dict,
    truth_to_dict,
    write_csv,
    write_json_atomic,
)
from .permtest import (
    PermutationConfig,
    PermutationResult,
    permutation_pvalues,
    row_abs_sum,
)
from .solver import (
    MultinomialInfeasible,
    RidgeFit,
    RidgeProblem,
    cv_select_lambda,
    fit_mse,
    fit_multinomial,
    fit_ridge,
    fold_indices,
    loss_value,
    multinomial_feasible,
    multinomial_gradient,
)
from .synthgen import (
    BnModel,
    GroundTruth,
    PolyToySpec,
    SemModel,
    gen_poly_toy,
    gen_sem_model,
    markov_boundary_of,
    sample_bn,
    sample_sem,
    sem_stationary_covariance,
    spectral_radius,
)
from .whiten import WhiteningTransform, apply_whitener, fit_whitener, unwhiten_coefficients

__all__ = [
    "AggregateSummary",
    "BnModel",
    "CovarianceEstimate",
    "CovridgeError",
    "CrpConfig",
    "CrpReport",
    "DataError",
    "DegenerateDataError",
    "EvalSummary",
    "GroundTruth",
    "MultinomialInfeasible",
    "NumericalError",
    "PermutationConfig",
    "PermutationResult",
    "PolyToySpec",
    "RidgeFit",
    "RidgeProblem",
    "SampleMatrix",
    "SemModel",
    "UsageError",
    "WhiteningTransform",
    "aggregate_replicates",
    "apply_whitener",
    "bn_model_from_dict",
    "bn_model_to_dict",
    "build_manifest",
    "canonical_dumps",
    "crp_run",
    "cv_select_lambda",
    "default_lambda_grid",
    "evaluate_ranking",
    "fit_mse",
    "fit_multinomial",
    "fit_ridge",
    "fit_whitener",
    "fold_indices",
    "gen_poly_toy",
    "gen_sem_model",
    "inverse_sqrt",
    "loss_value",
    "lw_shrink",
    "markov_boundary_of",
    "min_eigenvalue",
    "multinomial_feasible",
    "multinomial_gradient",
    "permutation_pvalues",
    "rank_histogram",
    "read_csv",
    "read_json",
    "report_from_dict",
    "report_to_dict",
    "row_abs_sum",
    "sample_bn",
    "sample_covariance",
    "sample_sem",
    "sem_model_from_dict",
    "sem_model_to_dict",
    "sem_stationary_covariance",
    "sha256_file",
    "spectral_radius",
    "truth_from_dict",
    "truth_to_dict",
    "unwhiten_coefficients",
    "write_csv",
    "write_json_atomic",
    "__version__",
]
