"""Per-series hybrid detection: smoothing, residual forecasting, flagging.

The pipeline fits, per series, an additive smoothing model on a leading
calibration prefix and scans the whole series causally to obtain residuals.
One shared recurrent forecaster (trained on residual windows pooled across
the training split) produces one-step point forecasts; adaptive empirical
quantiles of its absolute errors give prediction intervals, which are mapped
back to raw units by adding the smoothing baseline.  The detector then flags
steps whose interval scores stand out against the series' own calibration
region.

Explanations wrap the fitted stack as a black-box score of a raw lookback
window: the window's residuals drive one forecaster pass, the step's frozen
interval half-width turns the forecast into bounds, and the returned value is
the detector's continuous step score.  Channel baselines for "absent"
channels come from the smoothing baseline, i.e. what the channel was expected
to look like.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from gridseer.core import AnomalyEvent, LabeledDataset, MultiSeries
from gridseer.detector import (
    DetectionResult,
    DetectorConfig,
    detect,
    interval_score,
)
from gridseer.explain import Attribution, ExplainerConfig, shapley_explain, surrogate_explain
from gridseer.forecaster import (
    IntervalForecast,
    RecurrentModel,
    TrainingConfig,
    predict_intervals,
    predict_points,
    train_many,
)
from gridseer.smoothing import SmoothingState, SmoothingTrajectory
from gridseer.smoothing import estimate_season_length as _estimate_season
from gridseer.smoothing import fit as smoothing_fit
from gridseer.smoothing import preprocess as smoothing_preprocess

__all__ = [
    "DetectedEvent",
    "HybridConfig",
    "HybridModel",
    "SeriesDetection",
    "detect_dataset",
    "detect_series",
    "detection_score_fn",
    "explain_step",
    "fit_hybrid",
    "match_events",
    "step_labels",
]

_WIDTH_EPS = 1e-12


@dataclass(frozen=True)
class HybridConfig:
    """Knobs for the full stack; season_length None means FFT estimation."""

    season_length: int | None = None
    prefix_fraction: float = 0.25
    training: TrainingConfig = field(default_factory=TrainingConfig)
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    alpha: float = 0.05
    rolling_window: int = 200
    # Upper bounds on the fitted (alpha, beta, gamma) smoothing gains.  The
    # prefix is short, so unconstrained SSE fitting happily chases noise with
    # gamma near 1; a gain of g then writes g * spike into the state and plays
    # it back one season later as a phantom deviation.  Capping the gains
    # bounds that echo at cap * spike.  None disables the caps.
    smoothing_caps: tuple[float, float, float] | None = (0.3, 0.1, 0.05)
    # The forecaster sees residuals clipped to +/- this many robust deviations
    # (prefix MAD scale, per channel).  An unclipped disturbance would enter
    # its lookback window and error pool, wrecking forecasts and inflating
    # intervals for steps after the event; clipping keeps the envelope at
    # nominal width so the true residuals are scored against clean-process
    # behavior.  None disables clipping.
    input_clip_sigmas: float | None = 6.0

    def __post_init__(self) -> None:
        if not 0.0 < self.prefix_fraction < 1.0:
            raise ValueError("prefix_fraction must lie in (0, 1)")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if self.rolling_window < 1:
            raise ValueError("rolling_window must be >= 1")
        if self.smoothing_caps is not None:
            caps = tuple(float(c) for c in self.smoothing_caps)
            if len(caps) != 3 or any(not 0.0 < c <= 1.0 for c in caps):
                raise ValueError("smoothing_caps must be three gains in (0, 1]")
            object.__setattr__(self, "smoothing_caps", caps)
        if self.input_clip_sigmas is not None and not self.input_clip_sigmas > 0:
            raise ValueError("input_clip_sigmas must be positive")


@dataclass(frozen=True, eq=False)
class HybridModel:
    """Shared forecaster plus the configuration every series is scored with."""

    season_length: int
    config: HybridConfig
    forecaster: RecurrentModel


@dataclass(frozen=True)
class DetectedEvent:
    """One contiguous run of flagged steps (absolute indices, inclusive)."""

    start_step: int
    end_step: int
    peak_step: int
    peak_score: float


@dataclass(frozen=True, eq=False)
class SeriesDetection:
    """Everything the pipeline derived for one series."""

    series_id: str
    series: MultiSeries
    state: SmoothingState
    trajectory: SmoothingTrajectory
    forecast: IntervalForecast
    result: DetectionResult
    events: tuple[DetectedEvent, ...]

    @property
    def prefix(self) -> int:
        return self.forecast.start


def _prefix_length(cfg: HybridConfig, season_length: int, n_steps: int) -> int:
    prefix = max(2 * season_length, int(round(cfg.prefix_fraction * n_steps)))
    prefix = max(prefix, cfg.training.window + 2)
    if prefix + cfg.detector.window >= n_steps:
        raise ValueError(
            f"series of {n_steps} steps leaves no room to flag after a "
            f"{prefix}-step calibration prefix and {cfg.detector.window}-step "
            f"detector window"
        )
    return prefix


def _series_residuals(
    series: MultiSeries, cfg: HybridConfig, season_length: int
) -> tuple[MultiSeries, SmoothingState, SmoothingTrajectory, int]:
    """Causal residuals: parameters fit on the prefix, recurrences over all."""
    prefix = _prefix_length(cfg, season_length, series.n_steps)
    state = smoothing_fit(series.with_values(series.values[:prefix]), season_length)
    if cfg.smoothing_caps is not None:
        a_cap, b_cap, g_cap = cfg.smoothing_caps
        state = replace(
            state,
            alpha=np.minimum(state.alpha, a_cap),
            beta=np.minimum(state.beta, b_cap),
            gamma=np.minimum(state.gamma, g_cap),
        )
    residuals, trajectory = smoothing_preprocess(series, state)
    return residuals, state, trajectory, prefix


def _clip_bounds(
    residuals: MultiSeries, prefix: int, cfg: HybridConfig
) -> tuple[np.ndarray, np.ndarray] | None:
    """Per-channel forecaster-input bounds from the calibration prefix.

    center +/- sigmas * robust scale, where scale is the MAD of the prefix
    residuals rescaled to match a normal standard deviation.
    """
    if cfg.input_clip_sigmas is None:
        return None
    head = residuals.values[:prefix]
    center = np.median(head, axis=0)
    scale = 1.4826 * np.median(np.abs(head - center), axis=0)
    scale = np.maximum(scale, _WIDTH_EPS)
    margin = cfg.input_clip_sigmas * scale
    return center - margin, center + margin


def _forecaster_view(residuals: MultiSeries, prefix: int, cfg: HybridConfig) -> MultiSeries:
    """The residual stream as the forecaster sees it: clipped to prefix scale."""
    bounds = _clip_bounds(residuals, prefix, cfg)
    if bounds is None:
        return residuals
    return residuals.with_values(np.clip(residuals.values, bounds[0], bounds[1]))


def fit_hybrid(dataset: LabeledDataset, cfg: HybridConfig | None = None, seed: int = 0) -> HybridModel:
    """Train the shared residual forecaster on the dataset's training split."""
    cfg = cfg or HybridConfig()
    pairs = dataset.train_pairs
    if not pairs:
        raise ValueError("training split is empty")
    season = cfg.season_length or _estimate_season(pairs[0][0])
    residual_list = []
    for series, _ in pairs:
        residuals, _, _, prefix = _series_residuals(series, cfg, season)
        residual_list.append(_forecaster_view(residuals, prefix, cfg))
    forecaster = train_many(residual_list, cfg.training, seed)
    return HybridModel(season_length=season, config=cfg, forecaster=forecaster)


def detect_series(model: HybridModel, series: MultiSeries, series_id: str = "") -> SeriesDetection:
    """Score one series end to end with the fitted stack.

    Flagging runs on the de-seasonalized residual stream: the detector's
    deviation guard compares against the rolling spread of recent
    observations, which would be dominated by the seasonal swing in raw
    units and hide events that are large only relative to the noise floor.
    The stored forecast is mapped back to raw units for reporting; the
    interval-score criteria are identical in either space since both the
    observation and the bounds shift by the same baseline.
    """
    cfg = model.config
    residuals, state, trajectory, prefix = _series_residuals(
        series, cfg, model.season_length
    )
    lookback = model.forecaster.window
    if prefix <= lookback:
        raise ValueError(
            f"calibration prefix {prefix} must exceed the lookback window {lookback}"
        )
    seen = _forecaster_view(residuals, prefix, cfg)
    calib = seen.with_values(seen.values[:prefix])
    tail = seen.with_values(seen.values[prefix - lookback :])
    resid_forecast = predict_intervals(
        model.forecaster, tail, cfg.alpha, calib, cfg.rolling_window
    )
    resid_forecast = replace(resid_forecast, start=prefix)
    result = detect(residuals, resid_forecast, cfg.detector)
    base_tail = trajectory.baseline[prefix:]
    forecast = IntervalForecast(
        resid_forecast.point + base_tail,
        resid_forecast.lower + base_tail,
        resid_forecast.upper + base_tail,
        cfg.alpha,
        prefix,
        series.channel_names,
    )
    return SeriesDetection(
        series_id=series_id,
        series=series,
        state=state,
        trajectory=trajectory,
        forecast=forecast,
        result=result,
        events=_flag_runs(result),
    )


def detect_dataset(model: HybridModel, dataset: LabeledDataset) -> tuple[SeriesDetection, ...]:
    """detect_series over the test split, ids taken from the dataset."""
    out = []
    for idx in dataset.test_idx:
        series, _ = dataset.series[idx]
        out.append(detect_series(model, series, dataset.series_ids[idx]))
    return tuple(out)


def _flag_runs(result: DetectionResult) -> tuple[DetectedEvent, ...]:
    flags = result.flags
    scores = result.scores
    events = []
    i = 0
    n = flags.shape[0]
    while i < n:
        if not flags[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and flags[j + 1]:
            j += 1
        peak = i + int(np.argmax(scores[i : j + 1]))
        events.append(
            DetectedEvent(
                start_step=result.start + i,
                end_step=result.start + j,
                peak_step=result.start + peak,
                peak_score=float(scores[peak]),
            )
        )
        i = j + 1
    return tuple(events)


def detection_score_fn(model: HybridModel, det: SeriesDetection, step: int):
    """Black-box anomaly score of a raw lookback window ending at `step`.

    The returned callable accepts a (lookback + 1, K) raw window, converts it
    to residuals with the step's frozen smoothing baseline, forecasts the last
    step from the first lookback steps, applies the step's frozen interval
    half-width, and returns the detector's continuous score (max across
    channels).  The interval half-width stays frozen because it is causal
    calibration state, not part of the local model surface.
    """
    lookback = model.forecaster.window
    rel = step - det.forecast.start
    if not 0 <= rel < det.forecast.n_steps:
        raise ValueError(f"step {step} has no forecast")
    if step < lookback:
        raise ValueError(f"step {step} has no full lookback window")
    base_window = det.trajectory.baseline[step - lookback : step + 1]
    half = (det.forecast.upper[rel] - det.forecast.lower[rel]) / 2.0
    width = 2.0 * half
    denom = np.maximum(width, _WIDTH_EPS)
    names = det.series.channel_names
    alpha = det.forecast.alpha
    forecaster = model.forecaster
    residuals, _ = smoothing_preprocess(det.series, det.state)
    bounds = _clip_bounds(residuals, det.prefix, model.config)

    def score(window: np.ndarray) -> float:
        resid = np.asarray(window, dtype=np.float64) - base_window
        seen = resid if bounds is None else np.clip(resid, bounds[0], bounds[1])
        point = predict_points(forecaster, MultiSeries(seen, names))[0]
        lower = point - half
        upper = point + half
        scores = interval_score(resid[lookback], lower, upper, alpha)
        return float(np.max(1.0 + (scores - width) / denom))

    return score


def explain_step(
    model: HybridModel,
    det: SeriesDetection,
    step: int,
    cfg: ExplainerConfig | None = None,
    seed: int = 0,
) -> dict[str, Attribution]:
    """Both explainers on one flagged step; keys 'surrogate' and 'shapley'.

    Channels masked out are replaced by their smoothing-baseline trajectory,
    the model's notion of normal behavior for that channel at those steps.
    """
    cfg = cfg or ExplainerConfig()
    rel = step - det.result.start
    if not 0 <= rel < det.result.n_steps or not det.result.flags[rel]:
        raise ValueError(f"step {step} was not flagged; explanations require a detection")
    lookback = model.forecaster.window
    window = det.series.values[step - lookback : step + 1]
    base_window = det.trajectory.baseline[step - lookback : step + 1]
    cfg = replace(cfg, baseline=base_window)
    score = detection_score_fn(model, det, step)
    common = dict(
        cfg=cfg,
        seed=seed,
        series_id=det.series_id,
        step=step,
        channel_names=det.series.channel_names,
    )
    return {
        "surrogate": surrogate_explain(score, window, **common),
        "shapley": shapley_explain(score, window, **common),
    }


def step_labels(n_steps: int, events) -> np.ndarray:
    """Boolean per-step ground truth: inside any labeled event span."""
    labels = np.zeros(n_steps, dtype=bool)
    for event in events:
        labels[event.start_idx : event.end_idx + 1] = True
    return labels


def match_events(
    det: SeriesDetection, truth: tuple[AnomalyEvent, ...]
) -> list[tuple[AnomalyEvent, int | None]]:
    """Pair each labeled event with its first flagged step, None if missed."""
    flagged = det.result.flagged_steps()
    out = []
    for event in truth:
        inside = flagged[(flagged >= event.start_idx) & (flagged <= event.end_idx)]
        out.append((event, int(inside[0]) if inside.size else None))
    return out
