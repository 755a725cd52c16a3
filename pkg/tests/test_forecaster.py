"""Gradient correctness, training behavior, and interval-calibration tests."""

import numpy as np
import pytest

from gridseer.core import MultiSeries
from gridseer.forecaster import (
    IntervalForecast,
    RecurrentModel,
    TrainingConfig,
    init_params,
    load_model,
    loss_and_gradients,
    predict_intervals,
    predict_points,
    save_model,
    train,
)


def _finite_difference_grads(params, x, y, h=1e-5):
    grads = {}
    for key, value in params.items():
        g = np.zeros_like(value)
        flat = value.ravel()
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            lp, _ = loss_and_gradients(params, x, y)
            flat[i] = orig - h
            lm, _ = loss_and_gradients(params, x, y)
            flat[i] = orig
            g.ravel()[i] = (lp - lm) / (2 * h)
        grads[key] = g
    return grads


def test_gradients_match_central_differences():
    rng = np.random.default_rng(0)
    params = init_params(2, 4, rng)
    params["b"] = rng.uniform(-0.3, 0.3, size=params["b"].shape)
    params["by"] = rng.uniform(-0.3, 0.3, size=params["by"].shape)
    x = rng.standard_normal((3, 5, 2))
    y = rng.standard_normal((3, 2))
    _, analytic = loss_and_gradients(params, x, y)
    numeric = _finite_difference_grads(params, x, y)
    for key in params:
        a, f = analytic[key].ravel(), numeric[key].ravel()
        rel = np.abs(a - f) / np.maximum.reduce([np.abs(a), np.abs(f), np.full_like(a, 1e-8)])
        assert rel.max() <= 1e-4, f"{key}: worst relative error {rel.max():.2e}"


def test_training_is_deterministic():
    rng = np.random.default_rng(1)
    s = MultiSeries(rng.standard_normal((60, 2)), ("a", "b"))
    cfg = TrainingConfig(hidden_size=6, window=5, epochs=3, batch_size=16)
    m1 = train(s, cfg, seed=11)
    m2 = train(s, cfg, seed=11)
    for key in ("wx", "wh", "b", "wy", "by"):
        np.testing.assert_array_equal(getattr(m1, key), getattr(m2, key))
    np.testing.assert_array_equal(m1.val_curve, m2.val_curve)


def test_constant_input_is_learned_exactly():
    s = MultiSeries(np.full((80, 2), 0.5), ("a", "b"))
    cfg = TrainingConfig(
        hidden_size=8, window=6, epochs=400, batch_size=32, learning_rate=0.01
    )
    model = train(s, cfg, seed=2)
    assert model.val_curve[-1] <= 1e-6


def test_learns_ar1_better_than_mean_predictor():
    rng = np.random.default_rng(3)
    n = 400
    r = np.empty(n)
    r[0] = rng.standard_normal()
    for t in range(1, n):
        r[t] = 0.8 * r[t - 1] + 0.6 * rng.standard_normal()
    s = MultiSeries(r[:, None], ("r",))
    cfg = TrainingConfig(
        hidden_size=16, window=8, epochs=40, batch_size=32, learning_rate=0.005
    )
    model = train(s, cfg, seed=4)
    # the mean predictor's MSE is the variance of the series
    assert model.val_curve[-1] < np.var(r)


def test_train_rejects_short_series():
    s = MultiSeries(np.zeros((10, 1)), ("a",))
    with pytest.raises(ValueError, match="too short"):
        train(s, TrainingConfig(window=9), seed=0)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_divergence_aborts_with_diagnostic():
    rng = np.random.default_rng(5)
    s = MultiSeries(rng.standard_normal((50, 1)), ("a",))
    cfg = TrainingConfig(hidden_size=4, window=4, epochs=5, learning_rate=1e200)
    with pytest.raises(RuntimeError, match="diverged"):
        train(s, cfg, seed=1)


def _zero_model(k=1, h=4, window=4):
    return RecurrentModel(
        np.zeros((k, 4 * h)), np.zeros((h, 4 * h)), np.zeros(4 * h),
        np.zeros((h, k)), np.zeros(k), window,
    )


def test_zero_errors_collapse_intervals():
    model = _zero_model()
    flat = MultiSeries(np.zeros((30, 1)), ("a",))
    f = predict_intervals(model, flat, alpha=0.05, calib=flat)
    np.testing.assert_array_equal(f.lower, f.point)
    np.testing.assert_array_equal(f.upper, f.point)


def test_interval_width_shrinks_as_alpha_grows():
    rng = np.random.default_rng(6)
    model = _zero_model()
    x = MultiSeries(rng.standard_normal((60, 1)), ("a",))
    calib = MultiSeries(rng.standard_normal((60, 1)), ("a",))
    widths = []
    for alpha in (0.05, 0.2, 0.5, 0.9, 0.99):
        f = predict_intervals(model, x, alpha=alpha, calib=calib)
        widths.append(f.upper - f.lower)
    for wide, narrow in zip(widths, widths[1:]):
        assert np.all(narrow <= wide + 1e-15)
    # alpha near 1 keeps only the smallest errors: near-zero width
    assert widths[-1].max() < widths[0].min()


def test_interval_invariant_lower_point_upper():
    rng = np.random.default_rng(7)
    model = _zero_model()
    x = MultiSeries(rng.standard_normal((80, 1)), ("a",))
    f = predict_intervals(model, x, alpha=0.1, calib=x)
    assert np.all(f.lower <= f.point)
    assert np.all(f.point <= f.upper)
    assert f.start == model.window


def test_interval_coverage_tracks_alpha():
    # iid Gaussian forecast errors; a zero model predicts the mean exactly
    rng = np.random.default_rng(8)
    n = 2000
    x = MultiSeries(rng.standard_normal((n, 1)), ("e",))
    calib = MultiSeries(rng.standard_normal((400, 1)), ("e",))
    model = _zero_model()
    f = predict_intervals(model, x, alpha=0.05, calib=calib)
    actual = x.values[model.window :]
    covered = (actual >= f.lower) & (actual <= f.upper)
    assert abs(covered.mean() - 0.95) < 0.04


def test_predict_intervals_validates_inputs():
    model = _zero_model()
    x = MultiSeries(np.zeros((30, 1)), ("a",))
    with pytest.raises(ValueError, match="alpha"):
        predict_intervals(model, x, alpha=1.5, calib=x)
    short = MultiSeries(np.zeros((3, 1)), ("a",))
    with pytest.raises(ValueError, match="calibration"):
        predict_intervals(model, x, alpha=0.1, calib=short)


def test_checkpoint_roundtrip(tmp_path):
    rng = np.random.default_rng(9)
    s = MultiSeries(rng.standard_normal((40, 2)), ("a", "b"))
    cfg = TrainingConfig(hidden_size=5, window=4, epochs=2)
    model = train(s, cfg, seed=3)
    p = tmp_path / "model.npz"
    save_model(model, p)
    back = load_model(p)
    for key in ("wx", "wh", "b", "wy", "by"):
        np.testing.assert_array_equal(getattr(back, key), getattr(model, key))
    assert back.window == model.window
    np.testing.assert_array_equal(back.val_curve, model.val_curve)
    x = MultiSeries(rng.standard_normal((20, 2)), ("a", "b"))
    np.testing.assert_array_equal(predict_points(back, x), predict_points(model, x))


def test_interval_forecast_rejects_crossed_bounds():
    p = np.zeros((3, 1))
    with pytest.raises(ValueError, match="lower <= point"):
        IntervalForecast(p, p + 1.0, p + 2.0, 0.1, 0, ("a",))
