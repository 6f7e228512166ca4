"""Dose-finding designs for phase I trials: decision tables, per-cohort
conduct with safety rules, MTD selection, Monte Carlo operating
characteristics, a CLI, and a small conduct service."""

from .bayes import (
    BetaParams,
    DoseEstimate,
    ESTIMATION_PRIOR,
    IsotonicEstimate,
    SafetyConfig,
    UNIFORM_PRIOR,
    boin_select_mtd,
    decision_with_safety,
    estimates_from_outcomes,
    exceed_probability,
    pava,
    posterior,
    posterior_mean,
    safety_veto,
    select_mtd,
)
from .model_based import (
    BlrmConfig,
    BlrmHyper,
    CrmConfig,
    TrialData,
    blrm_interval_masses,
    blrm_posterior,
    blrm_recommend,
    crm_posterior,
    crm_recommend,
    default_skeleton,
)
from .rules import (
    BoinBoundaries,
    Decision,
    DoseIndex,
    DoseOutcome,
    EquivalenceInterval,
    RawDecision,
    Region,
    Verdict,
    apply_dose_boundaries,
    as_fraction,
    boin_decision,
    classify_vs_interval,
    i3p3_raw,
    three_plus_three_decision,
)
from .scenarios import (
    Scenario,
    builtin_scenarios,
    scenarios_from_json,
    scenarios_to_json,
    select_builtin,
    true_mtd_set,
)
from .simulate import (
    CohortEvent,
    DESIGNS,
    OperatingCharacteristics,
    SimConfig,
    SweepRow,
    TrialRecord,
    decision_frequency,
    make_policy,
    run_simulation,
    run_trial,
    run_trials,
    sensitivity_sweep,
    summarize,
)
from .tables import DecisionTable, MAX_TABLE_N, TABLE_DESIGNS, generate_table

__version__ = "0.1.0"

__all__ = [
    "BetaParams",
    "BlrmConfig",
    "BlrmHyper",
    "BoinBoundaries",
    "CohortEvent",
    "CrmConfig",
    "DESIGNS",
    "Decision",
    "DecisionTable",
    "DoseEstimate",
    "DoseIndex",
    "DoseOutcome",
    "ESTIMATION_PRIOR",
    "EquivalenceInterval",
    "IsotonicEstimate",
    "MAX_TABLE_N",
    "OperatingCharacteristics",
    "RawDecision",
    "Region",
    "SafetyConfig",
    "Scenario",
    "SimConfig",
    "SweepRow",
    "TABLE_DESIGNS",
    "TrialData",
    "TrialRecord",
    "UNIFORM_PRIOR",
    "Verdict",
    "apply_dose_boundaries",
    "as_fraction",
    "blrm_interval_masses",
    "blrm_posterior",
    "blrm_recommend",
    "boin_decision",
    "boin_select_mtd",
    "builtin_scenarios",
    "classify_vs_interval",
    "crm_posterior",
    "crm_recommend",
    "decision_frequency",
    "decision_with_safety",
    "default_skeleton",
    "estimates_from_outcomes",
    "exceed_probability",
    "generate_table",
    "i3p3_raw",
    "make_policy",
    "pava",
    "posterior",
    "posterior_mean",
    "run_simulation",
    "run_trial",
    "run_trials",
    "scenarios_from_json",
    "scenarios_to_json",
    "select_builtin",
    "select_mtd",
    "sensitivity_sweep",
    "summarize",
    "three_plus_three_decision",
    "true_mtd_set",
    "__version__",
]
