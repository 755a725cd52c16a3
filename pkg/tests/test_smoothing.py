"""Smoothing recurrence oracle, fit quality, and roundtrip tests."""

import numpy as np
import pytest

from gridseer.core import MultiSeries
from gridseer.smoothing import (
    DEFAULT_PARAMS,
    SmoothingState,
    estimate_season_length,
    fit,
    load_state,
    postprocess,
    preprocess,
    save_state,
    scan,
)


def _oracle_baseline(y, m, a, b, g, l0, b0, s0):
    """Straight-line reimplementation of the additive recurrences.

    Keeps the full seasonal history in a dict keyed by absolute step rather
    than a phase ring, so indexing mistakes cannot be shared with the library.
    """
    season = {i - m: s0[i] for i in range(m)}
    level, trend = l0, b0
    baseline = []
    for t, yt in enumerate(y):
        s_tm = season[t - m]
        baseline.append(level + trend + s_tm)
        new_level = a * (yt - s_tm) + (1 - a) * (level + trend)
        new_trend = b * (new_level - level) + (1 - b) * trend
        season[t] = g * (yt - new_level) + (1 - g) * s_tm
        level, trend = new_level, new_trend
    return np.array(baseline)


def _make_state(k, m, a, b, g, l0, b0, s0, names):
    return SmoothingState(
        np.full(k, a),
        np.full(k, b),
        np.full(k, g),
        np.asarray(l0, dtype=float),
        np.asarray(b0, dtype=float),
        np.asarray(s0, dtype=float),
        m,
        names,
    )


def test_recurrence_matches_straight_line_oracle():
    rng = np.random.default_rng(42)
    for _ in range(20):
        n = int(rng.integers(10, 60))
        m = int(rng.integers(1, 8))
        a, b, g = rng.uniform(0, 1, size=3)
        l0, b0_ = rng.standard_normal(2)
        s0 = rng.standard_normal(m)
        s0 -= s0.mean()
        y = rng.standard_normal(n)
        state = _make_state(1, m, a, b, g, [l0], [b0_], s0[:, None], ("x",))
        traj = scan(MultiSeries(y[:, None], ("x",)), state)
        expected = _oracle_baseline(y, m, a, b, g, l0, b0_, s0)
        np.testing.assert_allclose(traj.baseline[:, 0], expected, rtol=0, atol=1e-12)


def test_holt_update_hand_computed():
    # l0=10, b0=1, alpha=beta=0.5, no season, first observation 12:
    # l1 = 0.5*12 + 0.5*11 = 11.5 and b1 = 0.5*1.5 + 0.5*1 = 1.25
    state = _make_state(1, 1, 0.5, 0.5, 0.0, [10.0], [1.0], [[0.0]], ("x",))
    traj = scan(MultiSeries([[12.0]], ("x",)), state)
    assert traj.baseline[0, 0] == 11.0
    assert traj.levels[0, 0] == 11.5
    assert traj.trends[0, 0] == 1.25


def test_constant_series_is_a_fixed_point():
    x = MultiSeries(np.full((40, 2), 3.25), ("a", "b"))
    state = fit(x, season_length=5)
    np.testing.assert_allclose(state.level0, 3.25, atol=1e-12)
    np.testing.assert_allclose(state.trend0, 0.0, atol=1e-12)
    np.testing.assert_allclose(state.seasonal0, 0.0, atol=1e-12)
    residuals, _ = preprocess(x, state)
    np.testing.assert_allclose(residuals.values, 0.0, atol=1e-12)


def test_pure_seasonal_series_fits_exactly():
    m = 6
    pattern = np.array([1.0, 3.0, -2.0, 0.5, -1.5, -1.0])
    y = 10.0 + np.tile(pattern, 8)
    x = MultiSeries(y[:, None], ("s",))
    state = fit(x, season_length=m)
    residuals, _ = preprocess(x, state)
    assert float(np.square(residuals.values).sum()) <= 1e-8


def test_fit_beats_default_parameters():
    rng = np.random.default_rng(9)
    t = np.arange(120, dtype=float)
    y = 0.02 * t + 2 * np.sin(2 * np.pi * t / 12) + 0.3 * rng.standard_normal(120)
    x = MultiSeries(y[:, None], ("s",))
    fitted = fit(x, season_length=12)
    default = _make_state(
        1, 12, *DEFAULT_PARAMS,
        fitted.level0, fitted.trend0, fitted.seasonal0, ("s",)
    )
    sse_fitted = float(np.square(preprocess(x, fitted)[0].values).sum())
    sse_default = float(np.square(preprocess(x, default)[0].values).sum())
    assert sse_fitted <= sse_default


def test_roundtrip_identity():
    rng = np.random.default_rng(3)
    x = MultiSeries(rng.standard_normal((50, 3)), ("a", "b", "c"))
    state = fit(x, season_length=4)
    residuals, traj = preprocess(x, state)
    assert residuals.values.shape == x.values.shape
    back = postprocess(residuals, traj)
    np.testing.assert_allclose(back.values, x.values, rtol=0, atol=1e-12)


def test_postprocess_shifts_additively():
    rng = np.random.default_rng(4)
    x = MultiSeries(rng.standard_normal((30, 2)), ("a", "b"))
    state = fit(x, season_length=3)
    residuals, traj = preprocess(x, state)
    shifted = residuals.with_values(residuals.values + 2.5)
    back = postprocess(shifted, traj)
    np.testing.assert_allclose(back.values, x.values + 2.5, atol=1e-12)


def test_zero_residuals_give_pure_smoothing_forecast():
    rng = np.random.default_rng(5)
    x = MultiSeries(rng.standard_normal((30, 1)), ("a",))
    state = fit(x, season_length=3)
    _, traj = preprocess(x, state)
    zeros = x.with_values(np.zeros_like(x.values))
    back = postprocess(zeros, traj)
    np.testing.assert_array_equal(back.values, traj.baseline)


def test_fit_requires_two_seasons():
    x = MultiSeries(np.zeros((11, 1)), ("a",))
    with pytest.raises(ValueError, match="two full seasons"):
        fit(x, season_length=6)


def test_channel_mismatch_rejected():
    x = MultiSeries(np.zeros((20, 2)), ("a", "b"))
    state = fit(x, season_length=2)
    other = MultiSeries(np.zeros((20, 2)), ("a", "c"))
    with pytest.raises(ValueError, match="channel mismatch"):
        preprocess(other, state)


def test_season_length_estimate_recovers_period():
    t = np.arange(240, dtype=float)
    y = np.sin(2 * np.pi * t / 24) + 0.05 * t
    x = MultiSeries(y[:, None], ("s",))
    assert estimate_season_length(x) == 24


def test_state_json_roundtrip(tmp_path):
    rng = np.random.default_rng(6)
    x = MultiSeries(rng.standard_normal((40, 2)) + [[5.0, -2.0]], ("a", "b"))
    state = fit(x, season_length=5)
    p = tmp_path / "state.json"
    save_state(state, p)
    back = load_state(p)
    for name in ("alpha", "beta", "gamma", "level0", "trend0", "seasonal0"):
        np.testing.assert_array_equal(getattr(back, name), getattr(state, name))
    assert back.season_length == state.season_length
    assert back.channel_names == state.channel_names
