"""Observable-independent entanglement test for multipartite Gaussian states."""

from gausswit.criterion import (
    Status,
    VerdictReport,
    check_partition_grouping,
    evaluate_lambda,
    leading_minors,
    principal_minors,
    subset_gamma,
)
from gausswit.gamma import ParamVector, build_gamma, gamma_quadratic_form
from gausswit.optimizer import (
    MinorResult,
    OptimizerConfig,
    minimize_minor,
    minor_gradient,
    sample_oracle,
)
from gausswit.state_model import (
    InputError,
    PartitionQuery,
    PartyStructure,
    load_report,
    load_state,
    save_report,
    save_state,
)
from gausswit.states import (
    mixed_bipartite_cm,
    separable_product_cm,
    symmetric_pure_cm,
    vacuum_cm,
)
from gausswit.variance import (
    certificate_weights,
    check_separable_inequality,
    lur_bound,
    variance_sum,
)

__version__ = "0.1.0"

__all__ = [
    "InputError",
    "MinorResult",
    "OptimizerConfig",
    "ParamVector",
    "PartitionQuery",
    "PartyStructure",
    "Status",
    "VerdictReport",
    "build_gamma",
    "certificate_weights",
    "check_partition_grouping",
    "check_separable_inequality",
    "evaluate_lambda",
    "gamma_quadratic_form",
    "leading_minors",
    "load_report",
    "load_state",
    "lur_bound",
    "minimize_minor",
    "minor_gradient",
    "mixed_bipartite_cm",
    "principal_minors",
    "sample_oracle",
    "save_report",
    "save_state",
    "separable_product_cm",
    "subset_gamma",
    "symmetric_pure_cm",
    "vacuum_cm",
    "variance_sum",
]
