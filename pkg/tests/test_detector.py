"""Interval-score values, flagging logic, and detector property tests."""

import numpy as np
import pytest

from gridseer.core import MultiSeries
from gridseer.detector import (
    DetectorConfig,
    detect,
    interval_score,
    write_detection_csv,
)
from gridseer.forecaster import IntervalForecast


def _band_forecast(n, start, lo, hi, names=("x",), alpha=0.05):
    k = len(names)
    t = n - start
    point = np.full((t, k), (lo + hi) / 2.0)
    return IntervalForecast(
        point, np.full((t, k), lo), np.full((t, k), hi), alpha, start, names
    )


# ---------------------------------------------------------------------------
# interval score
# ---------------------------------------------------------------------------


def test_interval_score_inside_equals_width():
    assert interval_score(0.5, 0.0, 1.0, 0.05) == 1.0
    assert interval_score(0.5, 0.0, 1.0, 0.5) == 1.0


def test_interval_score_above_penalty():
    # width 1 plus (2 / 0.05) * exceedance 1 = 41
    assert interval_score(2.0, 0.0, 1.0, 0.05) == 41.0


def test_interval_score_below_penalty():
    assert interval_score(-1.0, 0.0, 1.0, 0.05) == 41.0


def test_interval_score_degenerate_on_point():
    assert interval_score(3.0, 3.0, 3.0, 0.1) == 0.0


def test_interval_score_rejects_crossed_bounds():
    with pytest.raises(ValueError, match="lower bound exceeds"):
        interval_score(0.0, 1.0, 0.0, 0.05)


def test_interval_score_vectorized():
    y = np.array([0.5, 2.0, -1.0])
    out = interval_score(y, np.zeros(3), np.ones(3), 0.05)
    np.testing.assert_array_equal(out, [1.0, 41.0, 41.0])


# ---------------------------------------------------------------------------
# detect
# ---------------------------------------------------------------------------


def test_all_inside_no_flags_scores_one():
    rng = np.random.default_rng(0)
    n = 200
    y = MultiSeries(rng.uniform(-0.5, 0.5, size=(n, 1)), ("x",))
    f = _band_forecast(n, 50, -1.0, 1.0)
    r = detect(y, f, DetectorConfig(window=50))
    assert not r.flags.any()
    np.testing.assert_array_equal(r.scores, 1.0)
    assert r.last_anomaly is None


def test_consecutive_equal_spikes_second_suppressed():
    n = 200
    values = np.zeros((n, 1))
    values[120, 0] = 50.0
    values[121, 0] = 50.0
    y = MultiSeries(values, ("x",))
    f = _band_forecast(n, 50, -1.0, 1.0)
    r = detect(y, f, DetectorConfig(window=50))
    # the second spike's interval score equals the first's: ratio 1.0 < 1.33
    assert list(r.flagged_steps()) == [120]
    assert r.last_anomaly == 120
    assert r.flagged_channels(120) == ("x",)


def test_larger_followup_spike_is_flagged():
    n = 260
    values = np.zeros((n, 1))
    values[120, 0] = 50.0
    values[200, 0] = 100.0  # exceeds 1.33x the first spike's interval score
    y = MultiSeries(values, ("x",))
    f = _band_forecast(n, 50, -1.0, 1.0)
    r = detect(y, f, DetectorConfig(window=50))
    assert list(r.flagged_steps()) == [120, 200]
    assert r.last_anomaly == 200


def test_single_12_sigma_spike_flagged_exactly():
    rng = np.random.default_rng(42)
    n = 500
    values = rng.standard_normal((n, 1))
    values[300, 0] = 12.0
    y = MultiSeries(values, ("x",))
    band = float(np.quantile(np.abs(values[:100, 0]), 0.95))
    f = _band_forecast(n, 100, -band, band)
    r = detect(y, f, DetectorConfig(window=50))
    assert list(r.flagged_steps()) == [300]


def test_flags_imply_outside_interval():
    rng = np.random.default_rng(7)
    n = 400
    values = rng.standard_normal((n, 2))
    values[250] += 20.0
    y = MultiSeries(values, ("a", "b"))
    f = _band_forecast(n, 60, -2.0, 2.0, names=("a", "b"))
    r = detect(y, f, DetectorConfig(window=30))
    outside = (values[60:] < -2.0) | (values[60:] > 2.0)
    assert np.all(~r.channel_flags | outside)


def test_scores_at_least_one_equality_iff_inside():
    rng = np.random.default_rng(8)
    n = 300
    values = 3.0 * rng.standard_normal((n, 1))
    y = MultiSeries(values, ("x",))
    f = _band_forecast(n, 50, -2.0, 2.0)
    r = detect(y, f, DetectorConfig(window=40))
    inside = (values[50:, 0] >= -2.0) & (values[50:, 0] <= 2.0)
    assert np.all(r.channel_scores >= 1.0)
    assert np.all((r.channel_scores[:, 0] == 1.0) == inside)


def test_detector_is_causal():
    rng = np.random.default_rng(9)
    n = 400
    values = 2.0 * rng.standard_normal((n, 1))
    values[200, 0] = 30.0
    values[350, 0] = 60.0
    y = MultiSeries(values, ("x",))
    f = _band_forecast(n, 60, -3.0, 3.0)
    full = detect(y, f, DetectorConfig(window=40))
    n2 = 280
    y2 = MultiSeries(values[:n2], ("x",))
    f2 = IntervalForecast(
        f.point[: n2 - 60], f.lower[: n2 - 60], f.upper[: n2 - 60],
        f.alpha, f.start, f.channel_names,
    )
    truncated = detect(y2, f2, DetectorConfig(window=40))
    np.testing.assert_array_equal(truncated.flags, full.flags[: n2 - 60])


def test_flag_pattern_invariant_under_scaling():
    rng = np.random.default_rng(10)
    n = 300
    values = rng.standard_normal((n, 1))
    values[220, 0] = 15.0
    y1 = MultiSeries(values, ("x",))
    f1 = _band_forecast(n, 60, -2.0, 2.0)
    lam = 37.5
    y2 = MultiSeries(lam * values, ("x",))
    f2 = IntervalForecast(
        lam * f1.point, lam * f1.lower, lam * f1.upper, f1.alpha, 60, ("x",)
    )
    cfg = DetectorConfig(window=40)
    r1 = detect(y1, f1, cfg)
    r2 = detect(y2, f2, cfg)
    np.testing.assert_array_equal(r1.channel_flags, r2.channel_flags)


def test_misalignment_rejected():
    y = MultiSeries(np.zeros((100, 1)), ("x",))
    f = _band_forecast(90, 40, -1.0, 1.0)
    with pytest.raises(ValueError, match="misaligned"):
        detect(y, f, DetectorConfig(window=20))


def test_window_exceeding_history_rejected():
    n = 100
    y = MultiSeries(np.zeros((n, 1)), ("x",))
    f = _band_forecast(n, 10, -1.0, 1.0)
    with pytest.raises(ValueError, match="exceeds history"):
        detect(y, f, DetectorConfig(window=50), detect_from=30)


def test_detection_csv_schema(tmp_path):
    n = 120
    values = np.zeros((n, 2))
    values[80, 1] = 25.0
    y = MultiSeries(values, ("a", "b"))
    f = _band_forecast(n, 40, -1.0, 1.0, names=("a", "b"))
    r = detect(y, f, DetectorConfig(window=30))
    p = tmp_path / "detections.csv"
    write_detection_csv(y, f, r, p)
    lines = p.read_text().strip().splitlines()
    assert lines[0] == "t,channel,flag,score,L,U,y"
    assert len(lines) == 1 + 2 * (n - 40)
    flagged = [ln for ln in lines[1:] if ln.split(",")[2] == "1"]
    assert len(flagged) == 1
    assert flagged[0].startswith("80,b,1,")
