"""Per-channel additive triple exponential smoothing (level, trend, season).

Used as the pre- and post-processing stages around the recurrent forecaster:
preprocess subtracts the one-step-ahead additive baseline, leaving residuals
for the learner; postprocess adds the baseline back onto predicted residuals.
The two are exact inverses because both use the same cached baseline.

Update rules, per channel, with season length m:

    l_t = a * (y_t - s_{t-m}) + (1 - a) * (l_{t-1} + b_{t-1})
    b_t = b * (l_t - l_{t-1}) + (1 - b) * b_{t-1}
    s_t = g * (y_t - l_t)     + (1 - g) * s_{t-m}

Channels are smoothed independently; cross-channel structure is left to the
downstream forecaster.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numba import njit

DEFAULT_PARAMS = (0.5, 0.1, 0.1)  # coordinate-descent start and reference point

STATE_FORMAT_VERSION = 1


@dataclass(frozen=True, eq=False)
class SmoothingState:
    """Fitted smoothing parameters and initial components, one set per channel.

    seasonal0[i, k] is the seasonal component at phase i for channel k; each
    channel's season sums to ~0 (additive form, renormalized at build time).
    """

    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    level0: np.ndarray
    trend0: np.ndarray
    seasonal0: np.ndarray
    season_length: int
    channel_names: tuple[str, ...]

    def __post_init__(self) -> None:
        k = len(self.channel_names)
        m = int(self.season_length)
        if m < 1:
            raise ValueError("season_length must be >= 1")
        for name in ("alpha", "beta", "gamma", "level0", "trend0"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            if arr.shape != (k,):
                raise ValueError(f"{name} must have shape ({k},), got {arr.shape}")
            object.__setattr__(self, name, arr)
        for name in ("alpha", "beta", "gamma"):
            arr = getattr(self, name)
            if np.any(arr < 0.0) or np.any(arr > 1.0):
                raise ValueError(f"{name} must lie in [0, 1]")
        seas = np.array(self.seasonal0, dtype=np.float64)
        if seas.shape != (m, k):
            raise ValueError(f"seasonal0 must have shape ({m}, {k}), got {seas.shape}")
        if np.any(np.abs(seas.sum(axis=0)) > 1e-12):
            seas = seas - seas.mean(axis=0)  # renormalize to a zero-sum season
        if np.any(np.abs(seas.sum(axis=0)) > 1e-6):
            raise ValueError("seasonal components failed to renormalize")
        object.__setattr__(self, "seasonal0", seas)
        object.__setattr__(self, "season_length", m)
        object.__setattr__(self, "channel_names", tuple(self.channel_names))


@dataclass(frozen=True, eq=False)
class SmoothingTrajectory:
    """Per-step smoothing components recorded while scanning a series.

    baseline[t] = l_{t-1} + b_{t-1} + s_{t-m}: the additive one-step-ahead
    baseline subtracted by preprocess and added back by postprocess.
    """

    baseline: np.ndarray
    levels: np.ndarray
    trends: np.ndarray
    channel_names: tuple[str, ...]

    @property
    def n_steps(self) -> int:
        return self.baseline.shape[0]

    def window(self, start: int, stop: int) -> "SmoothingTrajectory":
        if not 0 <= start <= stop <= self.n_steps:
            raise ValueError(f"bad window [{start}, {stop}) for {self.n_steps} steps")
        return SmoothingTrajectory(
            self.baseline[start:stop],
            self.levels[start:stop],
            self.trends[start:stop],
            self.channel_names,
        )


@njit(cache=True)
def _hw_scan(y, m, alpha, beta, gamma, l0, b0, s0, baseline, levels, trends):
    """Run the additive recurrences over one channel.

    Fills baseline/levels/trends for every step and returns the sum of squared
    one-step-ahead errors.  s0 holds s_{i-m} at slot i; the ring is updated in
    place on a copy.
    """
    n = y.shape[0]
    level = l0
    trend = b0
    season = s0.copy()
    sse = 0.0
    for t in range(n):
        i = t % m
        pred = level + trend + season[i]
        baseline[t] = pred
        err = y[t] - pred
        sse += err * err
        prev_level = level
        level = alpha * (y[t] - season[i]) + (1.0 - alpha) * (level + trend)
        trend = beta * (level - prev_level) + (1.0 - beta) * trend
        season[i] = gamma * (y[t] - level) + (1.0 - gamma) * season[i]
        levels[t] = level
        trends[t] = trend
    return sse


def _initial_components(y: np.ndarray, m: int) -> tuple[float, float, np.ndarray]:
    """Standard additive initialization from the leading complete seasons."""
    n_seasons = y.shape[0] // m
    season_means = y[: n_seasons * m].reshape(n_seasons, m).mean(axis=1)
    level0 = float(season_means[0])
    trend0 = float(np.diff(season_means).mean() / m) if n_seasons > 1 else 0.0
    seasonal0 = y[:m] - level0
    seasonal0 = seasonal0 - seasonal0.mean()
    return level0, trend0, seasonal0


def _channel_sse(y, m, params, l0, b0, s0, scratch):
    a, b, g = params
    return _hw_scan(y, m, a, b, g, l0, b0, s0, scratch[0], scratch[1], scratch[2])


def _coordinate_descent(y, m, l0, b0, s0, start, candidates_fn, max_passes=20):
    """Optimize (a, b, g) one coordinate at a time; strict-improvement moves only."""
    n = y.shape[0]
    scratch = np.empty((3, n))
    params = list(start)
    best = _channel_sse(y, m, params, l0, b0, s0, scratch)
    for _ in range(max_passes):
        moved = False
        for j in range(3):
            for cand in candidates_fn(params[j]):
                if cand == params[j]:
                    continue
                trial = params.copy()
                trial[j] = cand
                sse = _channel_sse(y, m, trial, l0, b0, s0, scratch)
                if sse < best:
                    best = sse
                    params = trial
                    moved = True
        if not moved:
            break
    return params, best


def fit(train, season_length: int | None = None) -> SmoothingState:
    """Fit per-channel smoothing parameters by one-step-ahead SSE.

    Coordinate descent from (0.5, 0.1, 0.1) over the 0.05 grid, then a local
    refinement pass on a 0.01 grid.  Needs at least two complete seasons.
    """
    m = int(season_length) if season_length is not None else estimate_season_length(train)
    if m < 1:
        raise ValueError("season_length must be >= 1")
    n, k = train.values.shape
    if n < 2 * m:
        raise ValueError(f"need at least two full seasons ({2 * m} steps), got {n}")
    coarse = np.linspace(0.0, 1.0, 21)
    alpha = np.empty(k)
    beta = np.empty(k)
    gamma = np.empty(k)
    level0 = np.empty(k)
    trend0 = np.empty(k)
    seasonal0 = np.empty((m, k))
    for c in range(k):
        y = np.ascontiguousarray(train.values[:, c])
        l0, b0, s0 = _initial_components(y, m)
        params, _ = _coordinate_descent(
            y, m, l0, b0, s0, DEFAULT_PARAMS, lambda _p: coarse
        )

        def fine(p):
            grid = np.round(p + 0.01 * np.arange(-5, 6), 10)
            return np.unique(np.clip(grid, 0.0, 1.0))

        params, _ = _coordinate_descent(y, m, l0, b0, s0, params, fine)
        alpha[c], beta[c], gamma[c] = params
        level0[c], trend0[c] = l0, b0
        seasonal0[:, c] = s0
    return SmoothingState(
        alpha, beta, gamma, level0, trend0, seasonal0, m, train.channel_names
    )


def _check_channels(state_names, series) -> None:
    if tuple(series.channel_names) != tuple(state_names):
        raise ValueError(
            f"channel mismatch: state has {list(state_names)}, "
            f"series has {list(series.channel_names)}"
        )


def scan(x, state: SmoothingState) -> SmoothingTrajectory:
    """Run the fitted recurrences over a series, recording components per step."""
    _check_channels(state.channel_names, x)
    n, k = x.values.shape
    baseline = np.empty((n, k))
    levels = np.empty((n, k))
    trends = np.empty((n, k))
    for c in range(k):
        y = np.ascontiguousarray(x.values[:, c])
        _hw_scan(
            y,
            state.season_length,
            state.alpha[c],
            state.beta[c],
            state.gamma[c],
            state.level0[c],
            state.trend0[c],
            np.ascontiguousarray(state.seasonal0[:, c]),
            baseline[:, c],
            levels[:, c],
            trends[:, c],
        )
    return SmoothingTrajectory(baseline, levels, trends, x.channel_names)


def preprocess(x, state: SmoothingState):
    """Subtract the one-step-ahead baseline; returns (residuals, trajectory).

    Residual r_t = y_t - (l_{t-1} + b_{t-1} + s_{t-m}) per channel.  The
    trajectory caches the baseline so postprocess can invert exactly.
    """
    traj = scan(x, state)
    residuals = x.with_values(x.values - traj.baseline)
    return residuals, traj


def postprocess(r_hat, trajectory: SmoothingTrajectory):
    """Add the cached baseline back: y_hat_t = r_hat_t + baseline_t."""
    if tuple(r_hat.channel_names) != tuple(trajectory.channel_names):
        raise ValueError("channel mismatch between residuals and trajectory")
    if r_hat.values.shape != trajectory.baseline.shape:
        raise ValueError(
            f"alignment mismatch: residuals {r_hat.values.shape} vs "
            f"trajectory {trajectory.baseline.shape}"
        )
    return r_hat.with_values(r_hat.values + trajectory.baseline)


def estimate_season_length(x, max_period: int | None = None) -> int:
    """Dominant detrended FFT period across channels, capped at N // 2."""
    n = x.values.shape[0]
    if n < 4:
        return 1
    t = np.arange(n, dtype=np.float64)
    detrended = np.empty_like(x.values)
    for c in range(x.values.shape[1]):
        coef = np.polyfit(t, x.values[:, c], 1)
        detrended[:, c] = x.values[:, c] - np.polyval(coef, t)
    power = np.abs(np.fft.rfft(detrended, axis=0)) ** 2
    total = power.sum(axis=1)
    total[0] = 0.0  # ignore DC
    if total.shape[0] > 1:
        total[1] = 0.0  # full-length period is not a season
    if not np.any(total > 0):
        return 1
    j = int(np.argmax(total))
    period = int(round(n / j))
    period = max(period, 1)
    cap = max_period if max_period is not None else n // 2
    return min(period, cap)


def save_state(state: SmoothingState, path) -> None:
    """Serialize a fitted state to JSON; floats roundtrip exactly."""
    doc = {
        "format_version": STATE_FORMAT_VERSION,
        "season_length": state.season_length,
        "channel_names": list(state.channel_names),
        "alpha": state.alpha.tolist(),
        "beta": state.beta.tolist(),
        "gamma": state.gamma.tolist(),
        "level0": state.level0.tolist(),
        "trend0": state.trend0.tolist(),
        "seasonal0": state.seasonal0.tolist(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def load_state(path) -> SmoothingState:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"smoothing state file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    version = doc.get("format_version")
    if version != STATE_FORMAT_VERSION:
        raise ValueError(f"unsupported smoothing state format: {version!r}")
    return SmoothingState(
        np.array(doc["alpha"]),
        np.array(doc["beta"]),
        np.array(doc["gamma"]),
        np.array(doc["level0"]),
        np.array(doc["trend0"]),
        np.array(doc["seasonal0"]),
        int(doc["season_length"]),
        tuple(doc["channel_names"]),
    )
