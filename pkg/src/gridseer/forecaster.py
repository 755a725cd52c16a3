"""Small gated recurrent forecaster over smoothed residuals.

A single-layer network of gated memory cells (input, forget, and output
gates with a tanh cell update) reads a lookback window of W residual vectors
and predicts the next one.  Training is full backpropagation through time
with the Adam update rule and global gradient-norm clipping, implemented
directly on numpy arrays so every gradient is checkable against finite
differences.

Prediction intervals are conformal-style: the half-width at level alpha is
the empirical (1 - alpha) quantile of recent absolute forecast errors,
recomputed over a rolling window so the band adapts as new errors arrive.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

PARAM_KEYS = ("wx", "wh", "b", "wy", "by")

CHECKPOINT_FORMAT_VERSION = 1


@dataclass(frozen=True)
class TrainingConfig:
    hidden_size: int = 32
    window: int = 48
    epochs: int = 200
    batch_size: int = 32
    learning_rate: float = 1e-3
    grad_clip: float = 5.0
    val_fraction: float = 0.2
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self) -> None:
        if self.hidden_size < 1 or self.window < 1:
            raise ValueError("hidden_size and window must be >= 1")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if not self.grad_clip > 0:
            raise ValueError("grad_clip must be positive")
        if not 0.0 < self.val_fraction < 1.0:
            raise ValueError("val_fraction must lie in (0, 1)")


@dataclass(frozen=True, eq=False)
class RecurrentModel:
    """Trained weights plus the loss history recorded during training.

    Shapes: wx (K, 4H), wh (H, 4H), b (4H,), wy (H, K), by (K,).  Gate slabs
    are ordered input, forget, cell, output along the 4H axis.
    """

    wx: np.ndarray
    wh: np.ndarray
    b: np.ndarray
    wy: np.ndarray
    by: np.ndarray
    window: int
    train_curve: np.ndarray = field(default_factory=lambda: np.zeros(0))
    val_curve: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self) -> None:
        k, four_h = self.wx.shape
        h = four_h // 4
        if four_h != 4 * h or self.wh.shape != (h, four_h):
            raise ValueError("inconsistent gate weight shapes")
        if self.b.shape != (four_h,) or self.wy.shape != (h, k) or self.by.shape != (k,):
            raise ValueError("inconsistent head shapes")
        for key in PARAM_KEYS:
            if not np.isfinite(getattr(self, key)).all():
                raise ValueError(f"non-finite weights in {key}")
        if self.window < 1:
            raise ValueError("window must be >= 1")

    @property
    def n_channels(self) -> int:
        return self.wx.shape[0]

    @property
    def hidden_size(self) -> int:
        return self.wh.shape[0]

    def params(self) -> dict[str, np.ndarray]:
        return {key: getattr(self, key) for key in PARAM_KEYS}


@dataclass(frozen=True, eq=False)
class IntervalForecast:
    """Per-step point forecasts with lower/upper bounds at level alpha.

    Row i covers source step start + i; lower <= point <= upper everywhere.
    """

    point: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    alpha: float
    start: int
    channel_names: tuple[str, ...]

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if self.point.shape != self.lower.shape or self.point.shape != self.upper.shape:
            raise ValueError("point/lower/upper shapes differ")
        if np.any(self.lower > self.point) or np.any(self.point > self.upper):
            raise ValueError("intervals must satisfy lower <= point <= upper")

    @property
    def n_steps(self) -> int:
        return self.point.shape[0]

    def shifted(self, offset: np.ndarray) -> "IntervalForecast":
        """Add a per-step offset to point and both bounds (width preserved)."""
        if offset.shape != self.point.shape:
            raise ValueError("offset shape must match forecast shape")
        return IntervalForecast(
            self.point + offset,
            self.lower + offset,
            self.upper + offset,
            self.alpha,
            self.start,
            self.channel_names,
        )


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def init_params(n_channels: int, hidden_size: int, rng: np.random.Generator):
    """Uniform +/- 1/sqrt(H) weights, zero biases."""
    h = hidden_size
    bound = 1.0 / np.sqrt(h)
    return {
        "wx": rng.uniform(-bound, bound, size=(n_channels, 4 * h)),
        "wh": rng.uniform(-bound, bound, size=(h, 4 * h)),
        "b": np.zeros(4 * h),
        "wy": rng.uniform(-bound, bound, size=(h, n_channels)),
        "by": np.zeros(n_channels),
    }


def _forward(params, x, keep_cache):
    """Scan a batch of windows x (B, W, K); returns (y_hat, cache).

    cache holds per-step activations for backpropagation when keep_cache is
    set, else None.
    """
    wx, wh, b = params["wx"], params["wh"], params["b"]
    batch, window, _k = x.shape
    h_size = wh.shape[0]
    h = np.zeros((batch, h_size))
    c = np.zeros((batch, h_size))
    cache = [] if keep_cache else None
    for t in range(window):
        xt = x[:, t, :]
        z = xt @ wx + h @ wh + b
        gi = _sigmoid(z[:, :h_size])
        gf = _sigmoid(z[:, h_size : 2 * h_size])
        gc = np.tanh(z[:, 2 * h_size : 3 * h_size])
        go = _sigmoid(z[:, 3 * h_size :])
        c_prev = c
        c = gf * c_prev + gi * gc
        tanh_c = np.tanh(c)
        if keep_cache:
            cache.append((xt, h, c_prev, gi, gf, gc, go, tanh_c))
        h = go * tanh_c
    y_hat = h @ params["wy"] + params["by"]
    return y_hat, cache


def loss_and_gradients(params, x, targets):
    """Mean-squared-error loss and its exact gradients for a window batch.

    x has shape (B, W, K), targets (B, K).  Gradients come from full
    backpropagation through time and match the parameter layout of params.
    """
    y_hat, cache = _forward(params, x, keep_cache=True)
    diff = y_hat - targets
    loss = float(np.mean(diff**2))
    d_y = 2.0 * diff / diff.size

    wh, wy = params["wh"], params["wy"]
    h_size = wh.shape[0]
    h_last = cache[-1][6] * cache[-1][7]  # go * tanh_c at the final step
    grads = {
        "wy": h_last.T @ d_y,
        "by": d_y.sum(axis=0),
        "wx": np.zeros_like(params["wx"]),
        "wh": np.zeros_like(wh),
        "b": np.zeros_like(params["b"]),
    }
    d_h = d_y @ wy.T
    d_c = np.zeros_like(d_h)
    for t in range(len(cache) - 1, -1, -1):
        xt, h_prev, c_prev, gi, gf, gc, go, tanh_c = cache[t]
        d_go = d_h * tanh_c * go * (1.0 - go)
        d_c = d_c + d_h * go * (1.0 - tanh_c**2)
        d_gi = d_c * gc * gi * (1.0 - gi)
        d_gf = d_c * c_prev * gf * (1.0 - gf)
        d_gc = d_c * gi * (1.0 - gc**2)
        d_z = np.concatenate([d_gi, d_gf, d_gc, d_go], axis=1)
        grads["wx"] += xt.T @ d_z
        grads["wh"] += h_prev.T @ d_z
        grads["b"] += d_z.sum(axis=0)
        d_h = d_z @ wh.T
        d_c = d_c * gf
    return loss, grads


def _clip_global_norm(grads, max_norm):
    total = np.sqrt(sum(float(np.sum(g**2)) for g in grads.values()))
    if total > max_norm:
        scale = max_norm / total
        for key in grads:
            grads[key] = grads[key] * scale
    return grads


def _windows(values: np.ndarray, window: int):
    """All (lookback, next-step) pairs from one residual matrix."""
    view = np.lib.stride_tricks.sliding_window_view(values, window, axis=0)
    x = view[:-1].transpose(0, 2, 1)  # (N - W, W, K)
    y = values[window:]
    return x, y


def train_many(series_list, cfg: TrainingConfig, seed: int) -> RecurrentModel:
    """Train one model on windows pooled from several residual series.

    Windows never cross series boundaries.  The validation set is the final
    val_fraction of windows in time order, which avoids look-ahead leakage.
    """
    if not series_list:
        raise ValueError("need at least one series")
    k = series_list[0].n_channels
    xs, ys = [], []
    for s in series_list:
        if s.n_channels != k:
            raise ValueError("all series must share the channel layout")
        if s.n_steps <= cfg.window + 1:
            raise ValueError(
                f"series length {s.n_steps} too short for window {cfg.window} "
                f"(need at least {cfg.window + 2} steps)"
            )
        x, y = _windows(s.values, cfg.window)
        xs.append(x)
        ys.append(y)
    x_all = np.concatenate(xs, axis=0)
    y_all = np.concatenate(ys, axis=0)
    n = x_all.shape[0]
    n_val = max(1, int(round(cfg.val_fraction * n)))
    n_train = n - n_val
    if n_train < 1:
        raise ValueError("too few windows to split off a validation set")
    x_train, y_train = x_all[:n_train], y_all[:n_train]
    x_val, y_val = x_all[n_train:], y_all[n_train:]

    rng = np.random.default_rng(seed)
    params = init_params(k, cfg.hidden_size, rng)
    adam_m = {key: np.zeros_like(v) for key, v in params.items()}
    adam_v = {key: np.zeros_like(v) for key, v in params.items()}
    step = 0
    train_curve = np.empty(cfg.epochs)
    val_curve = np.empty(cfg.epochs)
    for epoch in range(cfg.epochs):
        order = rng.permutation(n_train)
        epoch_loss = 0.0
        for lo in range(0, n_train, cfg.batch_size):
            idx = order[lo : lo + cfg.batch_size]
            loss, grads = loss_and_gradients(params, x_train[idx], y_train[idx])
            if not np.isfinite(loss):
                raise RuntimeError(
                    f"training diverged at epoch {epoch}: loss={loss!r}; "
                    f"try a smaller learning rate"
                )
            _clip_global_norm(grads, cfg.grad_clip)
            step += 1
            bc1 = 1.0 - cfg.adam_beta1**step
            bc2 = 1.0 - cfg.adam_beta2**step
            for key in params:
                adam_m[key] = cfg.adam_beta1 * adam_m[key] + (1 - cfg.adam_beta1) * grads[key]
                adam_v[key] = cfg.adam_beta2 * adam_v[key] + (1 - cfg.adam_beta2) * grads[key] ** 2
                params[key] = params[key] - cfg.learning_rate * (
                    adam_m[key] / bc1
                ) / (np.sqrt(adam_v[key] / bc2) + cfg.adam_eps)
            epoch_loss += loss * len(idx)
        train_curve[epoch] = epoch_loss / n_train
        val_hat, _ = _forward(params, x_val, keep_cache=False)
        val_curve[epoch] = float(np.mean((val_hat - y_val) ** 2))
    return RecurrentModel(
        params["wx"], params["wh"], params["b"], params["wy"], params["by"],
        cfg.window, train_curve, val_curve,
    )


def train(data, cfg: TrainingConfig, seed: int) -> RecurrentModel:
    """Train on a single residual series; see train_many."""
    return train_many([data], cfg, seed)


def predict_points(model: RecurrentModel, x) -> np.ndarray:
    """One-step-ahead predictions for steps [window, N) of x; shape (N-W, K)."""
    if x.n_channels != model.n_channels:
        raise ValueError(
            f"model expects {model.n_channels} channels, series has {x.n_channels}"
        )
    if x.n_steps <= model.window:
        raise ValueError(f"series too short for lookback window {model.window}")
    view = np.lib.stride_tricks.sliding_window_view(x.values, model.window, axis=0)
    windows = view[:-1].transpose(0, 2, 1)
    y_hat, _ = _forward(model.params(), windows, keep_cache=False)
    return y_hat


def _model_errors(model: RecurrentModel, series) -> np.ndarray:
    """Absolute one-step forecast errors on a held-out series, (N-W, K)."""
    y_hat = predict_points(model, series)
    return np.abs(series.values[model.window :] - y_hat)


def predict_intervals(
    model: RecurrentModel,
    x,
    alpha: float,
    calib,
    rolling_window: int = 200,
) -> IntervalForecast:
    """Point forecasts with adaptive empirical-quantile bands.

    The pool of absolute errors starts from the calibration series and is
    extended causally while scanning x: the interval at step t uses only
    errors observed strictly before t.  Half-width per channel is the
    (1 - alpha) quantile of the pool's most recent rolling_window entries.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if rolling_window < 1:
        raise ValueError("rolling_window must be >= 1")
    if calib is None or calib.n_steps <= model.window:
        raise ValueError("calibration series must be longer than the lookback window")
    if tuple(calib.channel_names) != tuple(x.channel_names):
        raise ValueError("calibration channels do not match series channels")
    seed_errors = _model_errors(model, calib)[-rolling_window:]
    if seed_errors.shape[0] == 0:
        raise ValueError("empty calibration set")
    y_hat = predict_points(model, x)
    actual = x.values[model.window :]
    t_steps, k = y_hat.shape
    # FIFO ring of the most recent errors; write points at the oldest entry
    pool = np.empty((rolling_window, k))
    count = seed_errors.shape[0]
    pool[:count] = seed_errors
    write = count % rolling_window
    q = 1.0 - alpha
    half = np.empty((t_steps, k))
    for t in range(t_steps):
        half[t] = np.quantile(pool[: min(count, rolling_window)], q, axis=0)
        pool[write] = np.abs(actual[t] - y_hat[t])
        write = (write + 1) % rolling_window
        count += 1
    return IntervalForecast(
        y_hat, y_hat - half, y_hat + half, alpha, model.window, x.channel_names
    )


def save_model(model: RecurrentModel, path) -> None:
    """Binary checkpoint (.npz); weights roundtrip bit-exactly."""
    np.savez(
        path,
        format_version=CHECKPOINT_FORMAT_VERSION,
        window=model.window,
        train_curve=model.train_curve,
        val_curve=model.val_curve,
        **model.params(),
    )


def load_model(path) -> RecurrentModel:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"model checkpoint not found: {path}")
    with np.load(path) as doc:
        version = int(doc["format_version"])
        if version != CHECKPOINT_FORMAT_VERSION:
            raise ValueError(f"unsupported checkpoint format: {version}")
        return RecurrentModel(
            doc["wx"], doc["wh"], doc["b"], doc["wy"], doc["by"],
            int(doc["window"]), doc["train_curve"], doc["val_curve"],
        )
