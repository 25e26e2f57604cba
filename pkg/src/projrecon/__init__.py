"""Reconstruction of discrete measures from random linear pushforwards,
uniqueness certification across dimensional regimes, and empirical sliced
Wasserstein separability diagnostics."""

from .coupling import (
    CouplingTensor,
    coupling_from_dict,
    coupling_from_json,
    coupling_marginal,
    coupling_to_dict,
    coupling_to_json,
    diagonal_coupling,
    independent_coupling,
    measure_from_coupling,
    sample_coupling,
    weight_polytope_uniqueness,
    weight_vector_feasible,
)
from .counterexample import (
    PolygonInstance,
    instance_from_dict,
    instance_from_json,
    instance_to_dict,
    instance_to_json,
    polygon_counterexample,
)
from .errors import (
    ConfigError,
    DegenerateInstanceError,
    DimensionMismatchError,
    DuplicatePointsError,
    InfeasibleError,
    InvalidOrderError,
    NonpositiveWeightError,
    ProjReconError,
    RankDeficientError,
    SupercriticalRegimeError,
    TupleBudgetExceededError,
    WeightSumMismatchError,
)
from .experiments import (
    TrialConfig,
    TrialSummary,
    config_from_dict,
    config_to_dict,
    run_critical_cardinality,
    run_sw_separability,
    run_uniqueness_trials,
    summary_to_dict,
    write_histogram_csv,
)
from .measure import (
    DiscreteMeasure,
    measure_from_dict,
    measure_from_json,
    measure_to_dict,
    measure_to_json,
    measures_equal,
    new_discrete_measure,
    pushforward,
)
from .projection import (
    PreimageDecomposition,
    ProjectionLaw,
    ProjectionStack,
    orthogonal_projector,
    preimage_decomposition,
    projection_stack,
    sample_stack,
    stack_from_dict,
    stack_from_json,
    stack_to_dict,
    stack_to_json,
)
from .reconstruction import (
    CandidatePoint,
    CandidateSupport,
    ReconstructionReport,
    Regime,
    SubspaceWitness,
    ToleranceConfig,
    Verdict,
    candidate_support,
    certify_uniqueness,
    classify_regime,
    critical_grid,
    pairwise_tuple_disjointness_check,
    report_to_dict,
    report_to_json,
    support_to_dict,
)
from .sliced import (
    DirectionSet,
    direction_set,
    directions_from_dict,
    directions_from_json,
    directions_from_stack,
    directions_to_dict,
    directions_to_json,
    empirical_sw,
    null_sw_witness,
    sample_directions,
    wasserstein2_1d,
    wasserstein2_exact,
)

__version__ = "0.1.0"
