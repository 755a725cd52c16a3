"""Interpretable hybrid anomaly detection for multivariate sensor streams.

The pipeline: per-channel seasonal smoothing turns raw streams into
residuals, a recurrent forecaster predicts them with adaptive empirical
intervals, a dynamic threshold flags interval breaks, and two local
explainers rank channels at each flagged step.  Classical whole-series
baselines, ranking metrics, a labeled synthetic generator, and a
config-driven multi-trial harness round out the benchmark protocol.
"""

from gridseer.baselines import (
    MiniRocketConfig,
    ddtw,
    dtw,
    idtw,
    minirocket_predict,
    minirocket_train,
    nn_classify,
    nn_distances,
)
from gridseer.core import (
    AnomalyEvent,
    EventType,
    GeneratorConfig,
    IngestSchema,
    LabeledDataset,
    MultiSeries,
    dataset_digest,
    ingest_csv,
    read_dataset,
    synth_generate,
    write_dataset,
)
from gridseer.detector import DetectionResult, DetectorConfig, detect
from gridseer.experiment import (
    KNOWN_MODELS,
    DatasetSpec,
    ExperimentReport,
    RunConfig,
    load_run_config,
    run_experiment,
)
from gridseer.explain import (
    Attribution,
    ExplainerConfig,
    shapley_explain,
    surrogate_explain,
)
from gridseer.forecaster import (
    IntervalForecast,
    RecurrentModel,
    TrainingConfig,
    load_model,
    predict_intervals,
    predict_points,
    save_model,
    train,
)
from gridseer.metrics import (
    MdsInput,
    SummaryStats,
    TrialReport,
    aggregate_trials,
    aupr,
    auroc,
    mds,
    ttest_one_sided,
)
from gridseer.pipeline import (
    DetectedEvent,
    HybridConfig,
    HybridModel,
    SeriesDetection,
    detect_dataset,
    detect_series,
    explain_step,
    fit_hybrid,
    match_events,
    step_labels,
)
from gridseer.smoothing import (
    SmoothingState,
    SmoothingTrajectory,
    fit as smoothing_fit,
    postprocess,
    preprocess,
)

__version__ = "0.1.0"

__all__ = [
    "AnomalyEvent",
    "Attribution",
    "DatasetSpec",
    "DetectedEvent",
    "DetectionResult",
    "DetectorConfig",
    "EventType",
    "ExperimentReport",
    "ExplainerConfig",
    "GeneratorConfig",
    "HybridConfig",
    "HybridModel",
    "IngestSchema",
    "IntervalForecast",
    "KNOWN_MODELS",
    "LabeledDataset",
    "MdsInput",
    "MiniRocketConfig",
    "MultiSeries",
    "RecurrentModel",
    "RunConfig",
    "SeriesDetection",
    "SmoothingState",
    "SmoothingTrajectory",
    "SummaryStats",
    "TrainingConfig",
    "TrialReport",
    "aggregate_trials",
    "aupr",
    "auroc",
    "dataset_digest",
    "ddtw",
    "detect",
    "detect_dataset",
    "detect_series",
    "dtw",
    "explain_step",
    "fit_hybrid",
    "idtw",
    "ingest_csv",
    "load_model",
    "load_run_config",
    "match_events",
    "mds",
    "minirocket_predict",
    "minirocket_train",
    "nn_classify",
    "nn_distances",
    "postprocess",
    "predict_intervals",
    "predict_points",
    "preprocess",
    "read_dataset",
    "run_experiment",
    "save_model",
    "shapley_explain",
    "smoothing_fit",
    "step_labels",
    "surrogate_explain",
    "synth_generate",
    "train",
    "ttest_one_sided",
    "write_dataset",
    "__version__",
]
