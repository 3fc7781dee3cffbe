"""SGD simulator and anytime-valid certificate engine for strongly convex problems."""

from .certificates import (
    Certificate,
    beta_for_coverage,
    coverage_of_beta,
    last_iterate_bound,
    last_iterate_certificate,
    lower_bound_curve,
    lower_curve_certificate,
    prior_art_reference,
    uniform_envelope,
    uniform_envelope_certificate,
)
from .engine import (
    NonFiniteIterateError,
    Trajectory,
    export_trajectory,
    run,
    run_until_stopping,
    stream_batch,
)
from .montecarlo import (
    RateFit,
    TrialSummary,
    binomial_se,
    estimate_last_iterate_violation,
    estimate_uniform_violation,
    fit_rate,
    sup_statistic_profile,
)
from .problems import (
    DiagnosticReport,
    OracleModel,
    ProblemSpec,
    gaussian_oracle,
    quadratic_problem,
    sample_gradient,
    sampling_oracle,
    subgaussian_diagnostic,
    tester_problem,
    zero_oracle,
)
from .schedule import ScheduleSpec, contraction_product_from_offset, offset_for
from .streams import StreamId
from .tester import (
    BitSequence,
    TestExperimentReport,
    UnattainableThresholdError,
    decoded_bit,
    encode_theta,
    kl_between,
    project_to_v,
    run_test_experiment,
    schedule_nk,
)

__version__ = "0.1.0"

__all__ = [
    "BitSequence",
    "Certificate",
    "DiagnosticReport",
    "NonFiniteIterateError",
    "OracleModel",
    "ProblemSpec",
    "RateFit",
    "ScheduleSpec",
    "StreamId",
    "TestExperimentReport",
    "Trajectory",
    "TrialSummary",
    "UnattainableThresholdError",
    "beta_for_coverage",
    "binomial_se",
    "contraction_product_from_offset",
    "coverage_of_beta",
    "decoded_bit",
    "encode_theta",
    "estimate_last_iterate_violation",
    "estimate_uniform_violation",
    "export_trajectory",
    "fit_rate",
    "gaussian_oracle",
    "kl_between",
    "last_iterate_bound",
    "last_iterate_certificate",
    "lower_bound_curve",
    "lower_curve_certificate",
    "offset_for",
    "prior_art_reference",
    "project_to_v",
    "quadratic_problem",
    "run",
    "run_test_experiment",
    "run_until_stopping",
    "sample_gradient",
    "sampling_oracle",
    "schedule_nk",
    "stream_batch",
    "subgaussian_diagnostic",
    "sup_statistic_profile",
    "tester_problem",
    "uniform_envelope",
    "uniform_envelope_certificate",
    "zero_oracle",
]
