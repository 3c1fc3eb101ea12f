"""OGTT curve fitting, glycemic classification, and index-plane separation.

Core flow: fit five-sample OGTT records to the damped-cosine glucose
model, screen fits for applicability, label records with ADA rules, and
separate normoglycemic from dysglycemic subjects with a soft-margin
linear classifier on the (A, alpha) index plane.

The HTTP layer lives in ``ogtt_indices.service`` and the command-line
client in ``ogtt_indices.cli``; both are imported on demand to keep
library imports light.
"""

__version__ = "0.1.0"

from .ada import (DYSGLYCEMIC, NORMOGLYCEMIC, AdaLabel, GlycemicCategory,
                  classify_ada, classify_record)
from .applicability import (DEFAULT_THRESHOLDS, ApplicabilityThresholds,
                            ApplicabilityVerdict, Condition, FilterOutcome,
                            check_applicability, filter_population)
from .errors import (ConfigError, GenerationError, InputError, ModelError,
                     NonConvergenceError, OgttError, ParameterError,
                     PipelineError, SchemaError, TrainingError)
from .estimation import (FitConfig, FitResult, default_fit_config, fit,
                         fit_objective, load_config, prior_penalty,
                         resolve_g0_bounds, save_config)
from .model import (MAX_CONCENTRATION, SAMPLE_TIMES, AckermanParams,
                    OgttRecord, Sex, curve_value, error_abs, evaluate,
                    normalize_phase,
                    period, period_from_omega, predict_at_sample_times,
                    residuals)
from .pipeline import (CohortReport, IngestResult, LoadMode, ReportEntry,
                       RowError, TrainMode, Trajectory, TrajectoryPoint,
                       compute_aggregates, ingest_csv, ingest_csv_text,
                       load_report, read_truth_json, render_cohort_csv,
                       render_report_json,
                       report_from_json_dict, report_to_json_dict,
                       render_trajectories_json, run_pipeline, save_report, track,
                       trajectories_to_json_dict, truth_to_json_dict,
                       verify_report, write_cohort_csv, write_truth_json)
from .plotting import emit_plot, render_csv, render_svg
from .svm import (AccuracyReport, ConfusionMatrix, FeatureScaling, IndexPoint,
                  SvmModel, TrainingDiagnostics, accuracy_report,
                  hinge_objective, index_point, is_clockwise, load_model,
                  predict, progression_angles, save_model, train,
                  train_detailed)
from .synth import (NO_NOISE, REFERENCE_CLUSTERS, ClusterSpec, NoiseKind,
                    NoiseSpec, TargetCluster, generate_cohort,
                    reference_cohort)

__all__ = [
    "__version__",
    # model
    "SAMPLE_TIMES", "MAX_CONCENTRATION", "Sex", "AckermanParams",
    "OgttRecord", "normalize_phase", "evaluate", "predict_at_sample_times",
    "curve_value", "residuals", "error_abs", "period",
    "period_from_omega",
    # estimation
    "FitConfig", "FitResult", "default_fit_config", "fit", "fit_objective",
    "load_config", "prior_penalty", "resolve_g0_bounds", "save_config",
    # ada
    "GlycemicCategory", "AdaLabel", "NORMOGLYCEMIC", "DYSGLYCEMIC",
    "classify_ada", "classify_record",
    # applicability
    "ApplicabilityThresholds", "ApplicabilityVerdict", "Condition",
    "DEFAULT_THRESHOLDS", "FilterOutcome", "check_applicability",
    "filter_population",
    # svm
    "IndexPoint", "FeatureScaling", "SvmModel", "TrainingDiagnostics",
    "ConfusionMatrix", "AccuracyReport", "index_point", "train",
    "train_detailed", "predict", "accuracy_report", "hinge_objective",
    "progression_angles", "is_clockwise", "save_model", "load_model",
    # synth
    "NoiseKind", "NoiseSpec", "NO_NOISE", "ClusterSpec", "TargetCluster",
    "REFERENCE_CLUSTERS", "generate_cohort", "reference_cohort",
    # pipeline
    "RowError", "IngestResult", "ingest_csv", "ingest_csv_text",
    "render_cohort_csv", "write_cohort_csv", "truth_to_json_dict",
    "write_truth_json", "read_truth_json", "TrainMode", "LoadMode",
    "ReportEntry",
    "CohortReport", "compute_aggregates", "run_pipeline",
    "report_to_json_dict", "report_from_json_dict", "render_report_json",
    "save_report", "load_report", "verify_report", "Trajectory",
    "TrajectoryPoint", "track", "trajectories_to_json_dict",
    "render_trajectories_json",
    # plotting
    "emit_plot", "render_svg", "render_csv",
    # errors
    "OgttError", "ParameterError", "InputError", "SchemaError",
    "ConfigError", "ModelError", "NonConvergenceError", "TrainingError",
    "GenerationError", "PipelineError",
]
