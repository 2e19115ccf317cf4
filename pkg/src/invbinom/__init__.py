# SPDX-FileCopyrightText: 2024-present Hedwyn <bpestourie@gmail.com>
#
# SPDX-License-Identifier: MIT
from ._results import Result, Ok, Err
from ._errors import Error
from ._checks import (
    BudgetInfeasible,
    ConfigError,
    ContractViolation,
    DataError,
    DomainError,
    NoExactLikelihood,
    SampleCapReached,
)
from ._iterators import collect_results, partition_results
from ._special import (
    circ_dist_pdf_cdf,
    digamma,
    dilog,
    harmonic,
    normal_cdf,
    trigamma,
)
from ._estimators import (
    BernoulliOracle,
    RepeatedEstimate,
    TrialEstimate,
    bias_master_curve,
    combine_repeats,
    convexity_corrected_likelihood,
    exact_ibs_variance,
    fixed_bias_exact,
    fixed_estimate,
    fixed_estimate_bounded,
    fixed_estimate_naive,
    fixed_variance_exact,
    ibs_expectation_exact,
    ibs_k_samples,
    ibs_log_likelihood_posterior,
    ibs_trial,
    ibs_value_from_k,
    ibs_variance_from_k,
    update_repeats,
)
from ._engine import (
    EngineConfig,
    EstimateReport,
    Evaluation,
    ExactEstimator,
    FixedEstimator,
    IbsEstimator,
    InformationEstimate,
    TrialRecord,
    aibs_estimate,
    check_exact_loglik,
    derive_seed,
    estimate_cross_entropy,
    estimate_entropy,
    estimate_fixed,
    estimate_parallel,
    estimate_sequential,
)
from ._allocation import (
    allocate_repeats,
    allocation_gain,
    optimal_repeats,
    pilot_then_allocate,
    rounded_allocation_gain,
)
from ._optimizer import FitResult, OptimizerConfig, fit_mle, loglik_loss, reestimate_at
from .dataset import Dataset, read_dataset, write_dataset

__all__ = [
    "Result",
    "Ok",
    "Err",
    "Error",
    "BudgetInfeasible",
    "ConfigError",
    "ContractViolation",
    "DataError",
    "DomainError",
    "NoExactLikelihood",
    "SampleCapReached",
    "collect_results",
    "partition_results",
    "circ_dist_pdf_cdf",
    "digamma",
    "dilog",
    "harmonic",
    "normal_cdf",
    "trigamma",
    "BernoulliOracle",
    "RepeatedEstimate",
    "TrialEstimate",
    "bias_master_curve",
    "combine_repeats",
    "convexity_corrected_likelihood",
    "exact_ibs_variance",
    "fixed_bias_exact",
    "fixed_estimate",
    "fixed_estimate_bounded",
    "fixed_estimate_naive",
    "fixed_variance_exact",
    "ibs_expectation_exact",
    "ibs_k_samples",
    "ibs_log_likelihood_posterior",
    "ibs_trial",
    "ibs_value_from_k",
    "ibs_variance_from_k",
    "update_repeats",
    "EngineConfig",
    "EstimateReport",
    "Evaluation",
    "ExactEstimator",
    "FixedEstimator",
    "IbsEstimator",
    "InformationEstimate",
    "TrialRecord",
    "aibs_estimate",
    "check_exact_loglik",
    "derive_seed",
    "estimate_cross_entropy",
    "estimate_entropy",
    "estimate_fixed",
    "estimate_parallel",
    "estimate_sequential",
    "allocate_repeats",
    "allocation_gain",
    "optimal_repeats",
    "pilot_then_allocate",
    "rounded_allocation_gain",
    "FitResult",
    "OptimizerConfig",
    "fit_mle",
    "loglik_loss",
    "reestimate_at",
    "Dataset",
    "read_dataset",
    "write_dataset",
]
