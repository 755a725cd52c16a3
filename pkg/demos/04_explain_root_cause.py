"""Which channel caused the alarm?

Reuses the detection setup from the previous demo, then runs both local
explainers (masked-perturbation surrogate and exact Shapley) on the first
flagged event and compares their channel rankings to the injected root.
"""

from gridseer.core import EventType, GeneratorConfig, synth_generate
from gridseer.detector import DetectorConfig
from gridseer.explain import ExplainerConfig
from gridseer.forecaster import TrainingConfig
from gridseer.pipeline import (
    HybridConfig,
    detect_series,
    explain_step,
    fit_hybrid,
    match_events,
)

generator = GeneratorConfig(
    n_series=20,
    n_steps=240,
    n_channels=8,
    season_length=24,
    level_range=(-0.25, 0.25),
    seasonal_amp=(0.8, 1.2),
    event_rate=1.0,
    min_start_frac=0.45,
    coupling=0.15,
    ar_coeff=0.3,
    event_types=(EventType.BRANCH_FAULT, EventType.BUS_TRIPPING),
    spike_amp=(20.0, 28.0),
    shift_amp=(10.0, 16.0),
    event_duration=(8, 20),
)
dataset = synth_generate(generator, seed=14)
config = HybridConfig(
    season_length=24,
    training=TrainingConfig(
        hidden_size=12, window=16, epochs=14, batch_size=64, learning_rate=3e-3
    ),
    detector=DetectorConfig(window=30),
    rolling_window=100,
    input_clip_sigmas=4.0,
)
model = fit_hybrid(dataset, config, seed=14)

explained = 0
for idx in dataset.test_idx:
    series, events = dataset.series[idx]
    det = detect_series(model, series, dataset.series_ids[idx])
    for event, step in match_events(det, events):
        if step is None:
            continue
        atts = explain_step(
            model, det, step, cfg=ExplainerConfig(n_samples=500, n_permutations=500), seed=0
        )
        print(f"\n{det.series_id} t={step}: injected root is {event.root_channel}")
        for name in ("surrogate", "shapley"):
            att = atts[name]
            order = sorted(
                zip(att.channel_names, att.importance, att.rank), key=lambda r: r[2]
            )
            top = ", ".join(f"{ch} ({imp:.1f})" for ch, imp, _ in order[:3])
            print(
                f"  {name:<10} top-3: {top}   root ranked "
                f"{att.channel_rank(event.root_channel)}/{len(att.channel_names)}"
            )
        explained += 1
        if explained >= 3:
            break
    if explained >= 3:
        break
