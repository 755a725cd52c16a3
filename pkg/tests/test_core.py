"""Data-model, CSV-roundtrip, and synthetic-generator tests."""

import numpy as np
import pytest

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
    read_labels_csv,
    read_series_csv,
    split_indices,
    strip_events,
    synth_generate,
    write_dataset,
    write_labels_csv,
    write_series_csv,
)


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------


def test_multiseries_minimal():
    s = MultiSeries([[1.0, 2.0], [3.0, 4.0]], ("a", "b"))
    assert s.n_steps == 2
    assert s.n_channels == 2
    assert s.channel_index("b") == 1


def test_multiseries_rejects_nan_and_inf():
    with pytest.raises(ValueError, match="non-finite"):
        MultiSeries([[1.0, np.nan]], ("a", "b"))
    with pytest.raises(ValueError, match="non-finite"):
        MultiSeries([[np.inf], [0.0]], ("a",))


def test_multiseries_rejects_bad_names():
    with pytest.raises(ValueError, match="unique"):
        MultiSeries([[1.0, 2.0]], ("a", "a"))
    with pytest.raises(ValueError, match="channel names"):
        MultiSeries([[1.0, 2.0]], ("a",))


def test_multiseries_values_immutable():
    s = MultiSeries([[1.0]], ("a",))
    with pytest.raises(ValueError):
        s.values[0, 0] = 2.0


def test_event_type_roundtrip_identity():
    for member in EventType:
        assert EventType.parse(str(member)) is member


def test_event_type_parse_bus_fault():
    assert EventType.parse("bus fault") is EventType.BUS_FAULT


def test_event_type_unknown_rejected():
    with pytest.raises(ValueError, match="unknown event type"):
        EventType.parse("solar flare")


def test_anomaly_event_span_validation():
    with pytest.raises(ValueError, match="span"):
        AnomalyEvent(5, 3, EventType.BUS_FAULT, "a")
    with pytest.raises(ValueError, match="span"):
        AnomalyEvent(-1, 3, EventType.BUS_FAULT, "a")
    e = AnomalyEvent(3, 5, EventType.BUS_FAULT, "a")
    assert e.duration == 3
    assert list(e.steps()) == [3, 4, 5]


def test_dataset_validates_events_against_series():
    s = MultiSeries(np.zeros((10, 2)), ("a", "b"))
    with pytest.raises(ValueError, match="exceeds"):
        LabeledDataset(((s, (AnomalyEvent(0, 10, EventType.BUS_FAULT, "a"),)),), (0,), ())
    with pytest.raises(ValueError, match="root channel"):
        LabeledDataset(((s, (AnomalyEvent(0, 1, EventType.BUS_FAULT, "zz"),)),), (0,), ())


def test_dataset_rejects_split_overlap():
    s = MultiSeries(np.zeros((4, 1)), ("a",))
    with pytest.raises(ValueError, match="overlap"):
        LabeledDataset(((s, ()), (s, ())), (0, 1), (1,))


def test_split_indices_default_fraction():
    train, test = split_indices(549, 0.2)
    assert len(train) == 439
    assert len(test) == 110
    assert not set(train) & set(test)
    # single series never loses its training set
    assert split_indices(1, 0.2) == ((0,), ())


# ---------------------------------------------------------------------------
# CSV ingestion and serialization
# ---------------------------------------------------------------------------


def test_ingest_minimal_two_by_two(tmp_path):
    p = tmp_path / "s.csv"
    p.write_text("t,a,b\n0,1.5,2.5\n1,3.5,4.5\n")
    ds = ingest_csv(p)
    assert ds.n_series == 1
    series, events = ds.series[0]
    assert series.n_steps == 2
    assert series.n_channels == 2
    assert events == ()
    np.testing.assert_array_equal(series.values, [[1.5, 2.5], [3.5, 4.5]])


def test_ingest_nan_cell_names_row_and_column(tmp_path):
    p = tmp_path / "s.csv"
    p.write_text("t,a,b\n0,1.0,2.0\n1,NaN,4.0\n")
    with pytest.raises(ValueError) as err:
        ingest_csv(p)
    assert "line 3" in str(err.value)
    assert "'a'" in str(err.value)


def test_ingest_unparseable_cell_names_row_and_column(tmp_path):
    p = tmp_path / "s.csv"
    p.write_text("t,a\n0,1.0\n1,oops\n")
    with pytest.raises(ValueError, match=r"line 3, column 'a'"):
        ingest_csv(p)


def test_ingest_ragged_row_rejected(tmp_path):
    p = tmp_path / "s.csv"
    p.write_text("t,a,b\n0,1.0,2.0\n1,3.0\n")
    with pytest.raises(ValueError, match="expected 3 fields"):
        ingest_csv(p)


def test_ingest_missing_file():
    with pytest.raises(FileNotFoundError):
        ingest_csv("/nonexistent/path.csv")


def test_series_csv_roundtrip_bit_exact(tmp_path):
    rng = np.random.default_rng(0)
    # include values with no short decimal representation
    values = np.concatenate([rng.standard_normal((50, 3)), [[1 / 3, np.pi, 1e-300]]])
    s = MultiSeries(values, ("u", "v", "w"))
    p = tmp_path / "s.csv"
    write_series_csv(s, p)
    back = read_series_csv(p)
    np.testing.assert_array_equal(back.values, s.values)
    assert back.channel_names == s.channel_names


def test_labels_roundtrip_and_unknown_type(tmp_path):
    labels = {
        "s0": [AnomalyEvent(3, 7, EventType.BRANCH_TRIPPING, "a")],
        "s1": [
            AnomalyEvent(1, 1, EventType.BUS_FAULT, "b"),
            AnomalyEvent(9, 12, EventType.FORCED_OSCILLATION, "a"),
        ],
    }
    p = tmp_path / "labels.csv"
    write_labels_csv(labels, p)
    back = read_labels_csv(p)
    assert back == {sid: list(evts) for sid, evts in labels.items()}

    bad = tmp_path / "bad.csv"
    bad.write_text(
        "series_id,start_idx,end_idx,type,root_channel\ns0,1,2,solar flare,a\n"
    )
    with pytest.raises(ValueError, match="unknown event type"):
        read_labels_csv(bad)


def test_label_root_channel_must_exist(tmp_path):
    sp = tmp_path / "s0.csv"
    sp.write_text("t,a\n0,1.0\n1,2.0\n2,3.0\n")
    lp = tmp_path / "labels.csv"
    lp.write_text("series_id,start_idx,end_idx,type,root_channel\ns0,0,1,bus fault,zz\n")
    with pytest.raises(ValueError, match="root channel"):
        ingest_csv(sp, IngestSchema(label_path=str(lp)))


def test_dataset_roundtrip_preserves_everything(tmp_path):
    cfg = GeneratorConfig(n_series=5, n_steps=64, n_channels=3, event_rate=1.5)
    ds = synth_generate(cfg, seed=3)
    out = tmp_path / "ds"
    write_dataset(ds, out)
    back = read_dataset(out)
    assert back.series_ids == ds.series_ids
    assert back.train_idx == ds.train_idx
    assert back.test_idx == ds.test_idx
    for (s0, e0), (s1, e1) in zip(ds.series, back.series):
        np.testing.assert_array_equal(s0.values, s1.values)
        assert [
            (e.start_idx, e.end_idx, e.type, e.root_channel) for e in e0
        ] == [(e.start_idx, e.end_idx, e.type, e.root_channel) for e in e1]
    assert dataset_digest(back) == dataset_digest(ds)


def test_digest_sensitive_to_values():
    cfg = GeneratorConfig(n_series=2, n_steps=32, n_channels=2, event_rate=0.0)
    a = synth_generate(cfg, seed=1)
    b = synth_generate(cfg, seed=2)
    assert dataset_digest(a) != dataset_digest(b)


# ---------------------------------------------------------------------------
# synthetic generator
# ---------------------------------------------------------------------------


def test_generator_deterministic_seed_7():
    cfg = GeneratorConfig(n_series=4, n_steps=96, n_channels=4)
    a = synth_generate(cfg, seed=7)
    b = synth_generate(cfg, seed=7)
    assert dataset_digest(a) == dataset_digest(b)
    for (sa, _), (sb, _) in zip(a.series, b.series):
        np.testing.assert_array_equal(sa.values, sb.values)


def test_generator_rate_zero_has_no_events():
    cfg = GeneratorConfig(n_series=6, n_steps=48, n_channels=3, event_rate=0.0)
    ds = synth_generate(cfg, seed=11)
    assert all(events == () for _, events in ds.series)


def test_spike_lands_on_labeled_root_channel():
    cfg = GeneratorConfig(
        n_series=8,
        n_steps=200,
        n_channels=5,
        event_rate=2.0,
        event_types=(EventType.BRANCH_FAULT, EventType.BUS_FAULT),
        spike_amp=(12.0, 12.0),
        noise_sigma=0.1,
    )
    dirty = synth_generate(cfg, seed=21)
    clean = synth_generate(strip_events(cfg), seed=21)
    checked = 0
    for (sd, events), (sc, _) in zip(dirty.series, clean.series):
        deviation = sd.values - sc.values
        for e in events:
            span = deviation[e.start_idx : e.end_idx + 1]
            root = sd.channel_index(e.root_channel)
            peak_by_channel = np.abs(span).max(axis=0)
            assert peak_by_channel.argmax() == root
            # the spike's first step carries the full 12 sigma amplitude
            assert peak_by_channel[root] == pytest.approx(12.0 * cfg.noise_sigma, rel=1e-12)
            checked += 1
    assert checked >= 5


def test_root_channel_has_max_deviation_all_types():
    cfg = GeneratorConfig(n_series=10, n_steps=240, n_channels=6, event_rate=2.0)
    dirty = synth_generate(cfg, seed=13)
    clean = synth_generate(strip_events(cfg), seed=13)
    checked = 0
    for (sd, events), (sc, _) in zip(dirty.series, clean.series):
        deviation = sd.values - sc.values
        for e in events:
            span = np.abs(deviation[e.start_idx : e.end_idx + 1])
            root = sd.channel_index(e.root_channel)
            assert span.max(axis=0).argmax() == root
            checked += 1
    assert checked >= 10


def test_noise_std_matches_configuration():
    # flat config isolates the AR(1) noise; 10k steps pins the std within 10%
    cfg = GeneratorConfig(
        n_series=1,
        n_steps=10_000,
        n_channels=2,
        season_length=24,
        level_range=(0.0, 0.0),
        seasonal_amp=(0.0, 0.0),
        trend_slope=0.0,
        noise_sigma=0.5,
        event_rate=0.0,
    )
    ds = synth_generate(cfg, seed=5)
    std = ds.series[0][0].values.std(axis=0)
    assert np.all(np.abs(std - 0.5) < 0.05)


def test_generator_config_validation():
    with pytest.raises(ValueError, match="coupling requires"):
        GeneratorConfig(n_channels=1, coupling=0.5, n_coupled=1, event_rate=1.0)
    with pytest.raises(ValueError, match="cannot fit"):
        GeneratorConfig(n_steps=40, event_duration=(8, 40), min_start_frac=0.3)
    with pytest.raises(ValueError, match="normal"):
        GeneratorConfig(event_types=(EventType.NORMAL,))
    with pytest.raises(ValueError, match="attenuated"):
        GeneratorConfig(coupling=1.0)
