"""Dynamic-threshold anomaly detection over interval forecasts.

A step is a candidate when the observation falls outside its prediction
interval.  A candidate is flagged anomalous only if its interval score is at
least is_ratio times the interval score of the last flagged observation
(bootstrapped from a high calibration quantile before any flag exists) and
its deviation from the rolling mean exceeds std_multiplier times the rolling
standard deviation of the last w observations.  Flagging updates the running
last-anomaly reference, so one large disturbance raises the bar for the next.

Every scored step also gets a continuous anomaly score
    s_t = 1 + (IS_t - width_t) / max(width_t, eps),
which is 1 exactly when the observation sits inside the interval and grows
with the exceedance; it is the ranking signal for ROC/PR evaluation.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from gridseer.forecaster import IntervalForecast

# score denominator guard for zero-width intervals
_WIDTH_EPS = 1e-12


@dataclass(frozen=True)
class DetectorConfig:
    is_ratio: float = 1.33
    std_multiplier: float = 10.0
    window: int = 50
    alpha: float = 0.05
    bootstrap_quantile: float = 0.99

    def __post_init__(self) -> None:
        if not self.is_ratio > 1.0:
            raise ValueError("is_ratio must exceed 1")
        if not self.std_multiplier > 0:
            raise ValueError("std_multiplier must be positive")
        if self.window < 3:
            raise ValueError("window must be >= 3")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if not 0.0 < self.bootstrap_quantile < 1.0:
            raise ValueError("bootstrap_quantile must lie in (0, 1)")


@dataclass(frozen=True, eq=False)
class DetectionResult:
    """Per-step flags and scores for one series.

    Row i covers absolute step start + i.  flags/scores aggregate across
    channels (any-channel flag, max-channel score); the per-channel views are
    kept for reporting and root-cause explanation.  Steps before detect_from
    are the detector's calibration region: scored but never flagged.
    """

    start: int
    detect_from: int
    flags: np.ndarray
    scores: np.ndarray
    channel_flags: np.ndarray
    channel_scores: np.ndarray
    last_anomaly: int | None
    channel_names: tuple[str, ...]

    def __post_init__(self) -> None:
        if not np.isfinite(self.channel_scores).all():
            raise ValueError("scores must be finite")

    @property
    def n_steps(self) -> int:
        return self.flags.shape[0]

    def flagged_steps(self) -> np.ndarray:
        """Absolute indices of flagged steps."""
        return np.nonzero(self.flags)[0] + self.start

    def flagged_channels(self, step: int) -> tuple[str, ...]:
        """Names of the channels that flagged at an absolute step."""
        i = step - self.start
        if not 0 <= i < self.n_steps:
            raise ValueError(f"step {step} outside scored range")
        return tuple(
            name
            for name, hit in zip(self.channel_names, self.channel_flags[i])
            if hit
        )


def interval_score(y, lower, upper, alpha: float):
    """Proper interval score: width plus 2/alpha-weighted exceedance.

    (U - L) + (2/alpha)(L - y) when y < L, + (2/alpha)(y - U) when y > U.
    Accepts scalars or same-shape arrays; always >= width, with equality
    exactly when y lies inside [L, U].
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    y_arr = np.asarray(y, dtype=np.float64)
    lo = np.asarray(lower, dtype=np.float64)
    hi = np.asarray(upper, dtype=np.float64)
    if np.any(lo > hi):
        raise ValueError("lower bound exceeds upper bound")
    below = np.maximum(lo - y_arr, 0.0)
    above = np.maximum(y_arr - hi, 0.0)
    out = (hi - lo) + (2.0 / alpha) * (below + above)
    return float(out) if np.isscalar(y) else out


def _rolling_stats(values: np.ndarray, window: int, t0: int, t1: int):
    """Mean/std (population) of the w observations before each t in [t0, t1)."""
    view = np.lib.stride_tricks.sliding_window_view(values, window, axis=0)
    # view[j] covers steps [j, j + w); the window ending before t is view[t - w]
    rows = view[t0 - window : t1 - window]
    return rows.mean(axis=2), rows.std(axis=2)


def detect(
    y,
    forecast: IntervalForecast,
    cfg: DetectorConfig | None = None,
    detect_from: int | None = None,
) -> DetectionResult:
    """Run the detector over one series against its interval forecast.

    The forecast must cover steps [forecast.start, N) of y exactly.  Steps in
    [forecast.start, detect_from) calibrate the bootstrap threshold (the
    bootstrap_quantile of their interval scores per channel); flagging starts
    at detect_from, which defaults to forecast.start + cfg.window and must
    leave at least cfg.window observations of history for the rolling test.
    """
    cfg = cfg or DetectorConfig()
    n, k = y.values.shape
    if tuple(y.channel_names) != tuple(forecast.channel_names):
        raise ValueError("series channels do not match forecast channels")
    if forecast.start + forecast.n_steps != n:
        raise ValueError(
            f"misaligned forecast: covers [{forecast.start}, "
            f"{forecast.start + forecast.n_steps}) of a {n}-step series"
        )
    start = forecast.start
    if detect_from is None:
        detect_from = start + cfg.window
    if detect_from < cfg.window:
        raise ValueError(
            f"rolling window {cfg.window} exceeds history before step {detect_from}"
        )
    if not start < detect_from <= n:
        raise ValueError(
            f"detect_from {detect_from} must lie in ({start}, {n}]: the scored "
            f"steps before it calibrate the bootstrap threshold"
        )

    observed = y.values[start:]
    width = forecast.upper - forecast.lower
    scores_matrix = interval_score(observed, forecast.lower, forecast.upper, cfg.alpha)
    anomaly_scores = 1.0 + (scores_matrix - width) / np.maximum(width, _WIDTH_EPS)
    candidates = (observed < forecast.lower) | (observed > forecast.upper)

    offset = detect_from - start
    boot_ref = np.quantile(scores_matrix[:offset], cfg.bootstrap_quantile, axis=0)

    means, stds = _rolling_stats(y.values, cfg.window, detect_from, n)
    deviations = np.abs(y.values[detect_from:] - means)
    exceeds_std = deviations > cfg.std_multiplier * stds

    flags = np.zeros((n - start, k), dtype=bool)
    last_anomaly: int | None = None
    for c in range(k):
        is_star = None
        for i in np.nonzero(candidates[offset:, c])[0] + offset:
            ref = boot_ref[c] if is_star is None else is_star
            if scores_matrix[i, c] >= cfg.is_ratio * ref and exceeds_std[i - offset, c]:
                flags[i, c] = True
                is_star = scores_matrix[i, c]
                step = start + i
                if last_anomaly is None or step > last_anomaly:
                    last_anomaly = step

    return DetectionResult(
        start=start,
        detect_from=detect_from,
        flags=flags.any(axis=1),
        scores=anomaly_scores.max(axis=1),
        channel_flags=flags,
        channel_scores=anomaly_scores,
        last_anomaly=last_anomaly,
        channel_names=tuple(y.channel_names),
    )


def write_detection_csv(y, forecast: IntervalForecast, result: DetectionResult, path) -> None:
    """Per-step, per-channel report: t,channel,flag,score,L,U,y."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "channel", "flag", "score", "L", "U", "y"])
        for i in range(result.n_steps):
            t = result.start + i
            for c, name in enumerate(result.channel_names):
                writer.writerow(
                    [
                        t,
                        name,
                        int(result.channel_flags[i, c]),
                        repr(float(result.channel_scores[i, c])),
                        repr(float(forecast.lower[i, c])),
                        repr(float(forecast.upper[i, c])),
                        repr(float(y.values[t, c])),
                    ]
                )
