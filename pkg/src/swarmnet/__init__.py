"""Feedforward grade classifier trained by swarm search or backpropagation."""

from .backprop import (
    BpConfig,
    TrainTrace,
    apply_update,
    backward_deltas,
    hidden_delta,
    output_delta,
    train_bp,
    zero_changes,
)
from .cfs import (
    STALE_LIMIT,
    CorrelationTable,
    Expansion,
    SelectionResult,
    best_first_search,
    merit,
    pearson,
    select_features,
)
from .data import (
    CAD_FEATURES,
    CAD_UNIT_POINTS,
    COMBINED_FEATURES,
    DEFAULT_GRADE_THRESHOLDS,
    FB_FEATURES,
    FEATURE_PRESETS,
    PRF_FEATURES,
    REDUCED_FEATURES,
    ClassLabel,
    Dataset,
    SubGrade,
    SubGrades,
    balance_oversample,
    coerce_labels,
    derive_subgrades,
    feature_group,
    final_label,
    grade_from_level,
    impute_mean,
    load_csv,
    load_normalization_stats,
    normalize_minmax,
    apply_normalization,
    save_csv,
    save_normalization_stats,
    stratified_split,
    synthesize,
)
from .estimators import (
    BackpropNeuralClassifier,
    CfsFeatureSelector,
    MeanImputer,
    MinMaxNormalizer,
    PsoNeuralClassifier,
)
from .evaluation import (
    BAND_EPSILON,
    TOLERANCE_BAND,
    TOLERANT_NOTE,
    ComparisonRecord,
    ConfusionMatrix,
    EvaluationReport,
    Prediction,
    assign_strict,
    assign_tolerant,
    compare_models,
    evaluate,
    format_results_table,
    predictions_for,
    report_from_predictions,
)
from .network import (
    MODEL_FORMAT_HEADER,
    Network,
    Topology,
    flat_dimension,
    load_model,
    logistic,
    mean_squared_error,
    save_model,
)
from .pso import (
    Particle,
    PsoConfig,
    PsoResult,
    SwarmState,
    minimize,
    mse_fitness,
    pso_train,
    update_position,
    update_velocity,
)

__version__ = "0.1.0"
