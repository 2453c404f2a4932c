"""Timing constraints on daily health behaviors.

The package covers the full path from guideline text to adherence checking:

- :mod:`adherence.constraints` -- the constraint taxonomy and wire format
- :mod:`adherence.extraction` -- template matching over guideline sentences
- :mod:`adherence.logs` -- behavior-log parsing, window occupancy matrices,
  and next-occurrence prediction frames
- :mod:`adherence.predictors` -- prior-day, autoregressive, and recurrent
  next-occurrence predictors
- :mod:`adherence.rules` -- violation rules and predicted-violation scoring
- :mod:`adherence.analytics` -- schedule similarity, regularity, sparsity
- :mod:`adherence.simulate` -- synthetic cohorts with planted violations
- :mod:`adherence.cli` -- the ``adherence`` command line
"""

from adherence.analytics import (
    cohort_regularity,
    regularity_scores,
    schedule_similarity,
    schedule_vector,
    similarity_matrix,
)
from adherence.constraints import (
    ActivityVocabulary,
    Compound,
    Consistency,
    Constraint,
    DEFAULT_VOCABULARY,
    DefinitiveDependency,
    Frequency,
    ImpreciseDependency,
    Interval,
    MalformedRecord,
    Negated,
    SAME_TIME,
    TimeDependency,
    TimeOfDay,
    UnknownActivity,
    canonicalize,
    deserialize,
    duration_minutes,
    serialize,
)
from adherence.extraction import (
    evaluate_extraction,
    extract_from_guideline,
    match_statement,
    split_statements,
)
from adherence.logs import (
    ActivityLog,
    LogEntry,
    OccupancyMatrix,
    PredictionFrame,
    context_windows_for,
    make_frames,
    occupancy_matrix,
    parse_log,
    parse_log_file,
    sparsity,
    split_frames,
    write_log_file,
)
from adherence.predictors import (
    ar_next_occurrence,
    entry_model_predict,
    load_model,
    next_occurrence_rmse,
    predict_window_model,
    predicted_instants,
    prior_day_predict,
    save_model,
    train_entry_model,
    train_window_model,
)
from adherence.rules import (
    RuleConfig,
    check_instant,
    check_log,
    evaluate_constraint,
    evaluate_violations,
)
from adherence.simulate import (
    BehaviorTemplate,
    CohortSpec,
    DependencyLink,
    Plant,
    simulate_cohort,
)

__all__ = [
    "ActivityLog",
    "ActivityVocabulary",
    "BehaviorTemplate",
    "CohortSpec",
    "Compound",
    "Consistency",
    "Constraint",
    "DEFAULT_VOCABULARY",
    "DefinitiveDependency",
    "DependencyLink",
    "Frequency",
    "ImpreciseDependency",
    "Interval",
    "LogEntry",
    "MalformedRecord",
    "Negated",
    "OccupancyMatrix",
    "Plant",
    "PredictionFrame",
    "RuleConfig",
    "SAME_TIME",
    "TimeDependency",
    "TimeOfDay",
    "UnknownActivity",
    "ar_next_occurrence",
    "canonicalize",
    "check_instant",
    "check_log",
    "cohort_regularity",
    "context_windows_for",
    "deserialize",
    "duration_minutes",
    "entry_model_predict",
    "evaluate_constraint",
    "evaluate_extraction",
    "evaluate_violations",
    "extract_from_guideline",
    "load_model",
    "make_frames",
    "match_statement",
    "next_occurrence_rmse",
    "occupancy_matrix",
    "parse_log",
    "parse_log_file",
    "predict_window_model",
    "predicted_instants",
    "prior_day_predict",
    "regularity_scores",
    "save_model",
    "schedule_similarity",
    "schedule_vector",
    "serialize",
    "similarity_matrix",
    "simulate_cohort",
    "sparsity",
    "split_frames",
    "split_statements",
    "train_entry_model",
    "train_window_model",
    "write_log_file",
]

__version__ = "0.1.0"
