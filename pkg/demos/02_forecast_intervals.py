"""Recurrent forecasting with adaptive empirical intervals.

Trains the from-scratch recurrent forecaster on an AR(1) stream, then checks
that the alpha=0.05 interval band actually covers about 95% of unseen points.
The band half-width is the rolling empirical quantile of recent absolute
forecast errors, so it adapts when the error level changes.
"""

import numpy as np

from gridseer.core import MultiSeries
from gridseer.forecaster import TrainingConfig, predict_intervals, train


def ar1(rng, n, phi=0.8):
    e = rng.standard_normal(n)
    x = np.empty(n)
    x[0] = e[0] / np.sqrt(1 - phi * phi)
    for t in range(1, n):
        x[t] = phi * x[t - 1] + e[t]
    return x


rng = np.random.default_rng(42)
train_s = MultiSeries(ar1(rng, 1200)[:, None], ("x",))
calib_s = MultiSeries(ar1(rng, 800)[:, None], ("x",))
eval_s = MultiSeries(ar1(rng, 3000)[:, None], ("x",))

cfg = TrainingConfig(hidden_size=8, window=8, epochs=15, batch_size=64, learning_rate=3e-3)
model = train(train_s, cfg, seed=42)
print(f"validation mse over epochs: {model.val_curve[0]:.3f} -> {model.val_curve[-1]:.3f}")

for alpha in (0.2, 0.1, 0.05):
    f = predict_intervals(model, eval_s, alpha=alpha, calib=calib_s, rolling_window=200)
    actual = eval_s.values[model.window :]
    covered = float(((actual >= f.lower) & (actual <= f.upper)).mean())
    width = float((f.upper - f.lower).mean())
    print(f"alpha {alpha:.2f}: coverage {covered:.3f}  mean width {width:.3f}")
