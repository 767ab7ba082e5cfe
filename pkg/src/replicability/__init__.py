"""Replicability analysis for a primary and a follow-up study.

A finding counts as replicated only when it is non-null in both studies.
This package tests families of such "no replicability" null hypotheses
with two-stage procedures that control the FWER or the FDR across the
whole pipeline, including the data-driven choice of which hypotheses to
follow up, plus dependence-robust variants, replicability adjusted
p-values, and a seeded Monte-Carlo engine for power and error studies.
"""

from .adjust import AdjustedRow, AdjustedTable, build_adjusted_table
from .data import (
    DiscoveryReport,
    HypothesisRecord,
    HypothesisScore,
    StudyPairData,
    TruthAssignment,
    ValidationIssue,
    ValidationResult,
    validate_dataset,
)
from .dataio import parse_pvalue_csv, parse_scenario_file, write_pvalue_csv
from .datasets import load_crohns_disease, load_hippocampal_volume
from .errors import ApplicabilityError, CapacityError, DataError, ReplicabilityError
from .numeric import (
    HarmonicCache,
    chisq_survival_even_df,
    harmonic,
    solve_oracle_qprime,
    solve_q1_tilde_thresholded,
    std_normal_cdf,
    std_normal_quantile,
)
from .procedures import (
    Dependence,
    FwerMethod,
    ProcedureParams,
    baseline_fisher_meta,
    baseline_naive_bh_bh,
    baseline_partial_conjunction,
    bonf_replicability_adjust,
    fdr_replicability_adjust,
    fdr_symmetric,
    fdr_two_stage,
    fdr_two_stage_rscan,
    fisher_combined_pvalues,
    fwer_two_stage,
    oracle_calibrated_run,
)
from .selection import SelectionRule, bh_reject, probe_validity, select
from .sim import (
    SimEstimate,
    SimProcedure,
    SimScenario,
    SimSelection,
    analytic_power_bonf_max,
    analytic_power_two_stage,
    generate_rep,
    run_scenario,
    sweep,
    truth_block_sizes,
)

__version__ = "0.1.0"

__all__ = [
    "AdjustedRow",
    "AdjustedTable",
    "ApplicabilityError",
    "CapacityError",
    "DataError",
    "Dependence",
    "DiscoveryReport",
    "FwerMethod",
    "HarmonicCache",
    "HypothesisRecord",
    "HypothesisScore",
    "ProcedureParams",
    "ReplicabilityError",
    "SelectionRule",
    "SimEstimate",
    "SimProcedure",
    "SimScenario",
    "SimSelection",
    "StudyPairData",
    "TruthAssignment",
    "ValidationIssue",
    "ValidationResult",
    "analytic_power_bonf_max",
    "analytic_power_two_stage",
    "baseline_fisher_meta",
    "baseline_naive_bh_bh",
    "baseline_partial_conjunction",
    "bh_reject",
    "bonf_replicability_adjust",
    "build_adjusted_table",
    "chisq_survival_even_df",
    "fdr_replicability_adjust",
    "fdr_symmetric",
    "fdr_two_stage",
    "fdr_two_stage_rscan",
    "fisher_combined_pvalues",
    "fwer_two_stage",
    "generate_rep",
    "harmonic",
    "load_crohns_disease",
    "load_hippocampal_volume",
    "oracle_calibrated_run",
    "parse_pvalue_csv",
    "parse_scenario_file",
    "probe_validity",
    "run_scenario",
    "select",
    "solve_oracle_qprime",
    "solve_q1_tilde_thresholded",
    "std_normal_cdf",
    "std_normal_quantile",
    "sweep",
    "truth_block_sizes",
    "validate_dataset",
    "write_pvalue_csv",
]
