"""Causal inference on networks of binary outcomes.

Treatments and covariates point into one block of jointly modeled
binary outcomes; the package covers exact inference on that block,
Gibbs sampling, structure learning, maximum-likelihood and
pseudo-likelihood fitting, bootstrap effect estimation, a temporal
contagion lab with its independence-test battery, and ingestion of
court voting records.
"""

from .data import CaseDataset, read_dataset_csv, write_dataset_csv
from .errors import (
    BootstrapFailureError,
    CapacityError,
    ConfigurationError,
    DegenerateDataError,
    DegenerateNodeWarning,
    EmptyDatasetError,
    FitConvergenceError,
    SchemaError,
    SeparationWarning,
    ShapeError,
    UndefinedScaleError,
)
from .experiments import RecoveryReport, recovery_experiment
from .fitting import (
    AND_RULE,
    OR_RULE,
    BootstrapSpec,
    EffectQuery,
    NodewiseFit,
    StructureResult,
    bootstrap_effect,
    default_penalty_grid,
    effect_on_data,
    f1_edges,
    fit_exact_mle,
    fit_pseudolikelihood,
    learn_structure,
    likelihood_ratio_ci_test,
    node_logistic_fit,
)
from .gibbs import (
    GibbsConfig,
    SimulationScaling,
    apply_scaling,
    generate_dataset,
    gibbs_chain,
    node_conditional_prob,
)
from .graph import NetworkGraph, canonical_edge, complete_graph
from .inference import (
    EFFECT_SCALES,
    ODDS_RATIO,
    RISK_DIFFERENCE,
    RISK_RATIO,
    CovariateLaw,
    EffectEstimate,
    EventPredicate,
    causal_effect,
    contrast_on_scale,
    counterfactual_event_prob,
    enumerate_joint,
    event_prob,
    exact_marginals,
    joint_prob,
    log_partition,
    model_expectations,
    parse_event,
)
from .model import (
    PER_NODE,
    SHARED,
    ChainGraphModel,
    log_potential,
    model_fingerprint,
    model_from_json,
    model_to_json,
    validate_model,
)
from .scdb import (
    ISSUE_AREAS,
    REHNQUIST_PANEL,
    CourtPanel,
    binarize_issue,
    judicial_power_model,
    load_cases,
    summarize,
)
from .temporal import (
    BatteryReport,
    TemporalParams,
    conjecture_experiment,
    random_network,
    run_battery,
    simulate_temporal,
    write_battery_csv,
)

__all__ = [
    "AND_RULE",
    "apply_scaling",
    "BatteryReport",
    "binarize_issue",
    "bootstrap_effect",
    "BootstrapFailureError",
    "BootstrapSpec",
    "canonical_edge",
    "CapacityError",
    "CaseDataset",
    "causal_effect",
    "ChainGraphModel",
    "complete_graph",
    "ConfigurationError",
    "conjecture_experiment",
    "contrast_on_scale",
    "counterfactual_event_prob",
    "CourtPanel",
    "CovariateLaw",
    "default_penalty_grid",
    "DegenerateDataError",
    "DegenerateNodeWarning",
    "effect_on_data",
    "EFFECT_SCALES",
    "EffectEstimate",
    "EffectQuery",
    "EmptyDatasetError",
    "enumerate_joint",
    "event_prob",
    "EventPredicate",
    "exact_marginals",
    "f1_edges",
    "fit_exact_mle",
    "fit_pseudolikelihood",
    "FitConvergenceError",
    "generate_dataset",
    "gibbs_chain",
    "GibbsConfig",
    "ISSUE_AREAS",
    "joint_prob",
    "judicial_power_model",
    "learn_structure",
    "likelihood_ratio_ci_test",
    "load_cases",
    "log_partition",
    "log_potential",
    "model_expectations",
    "model_fingerprint",
    "model_from_json",
    "model_to_json",
    "NetworkGraph",
    "node_conditional_prob",
    "node_logistic_fit",
    "NodewiseFit",
    "ODDS_RATIO",
    "OR_RULE",
    "parse_event",
    "PER_NODE",
    "random_network",
    "read_dataset_csv",
    "recovery_experiment",
    "RecoveryReport",
    "REHNQUIST_PANEL",
    "RISK_DIFFERENCE",
    "RISK_RATIO",
    "run_battery",
    "SchemaError",
    "SeparationWarning",
    "ShapeError",
    "SHARED",
    "simulate_temporal",
    "SimulationScaling",
    "StructureResult",
    "summarize",
    "TemporalParams",
    "UndefinedScaleError",
    "validate_model",
    "write_battery_csv",
    "write_dataset_csv",
]
