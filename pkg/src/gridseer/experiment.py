"""Multi-trial benchmark harness: every model over one dataset, aggregated.

One run fixes the dataset (generated from the base seed or loaded from CSV)
and repeats each stochastic model across trials seeded base_seed + trial.
Deterministic baselines are computed once and replicated, so their spread
over trials is exactly zero.  Reports land in out_dir as CSV/JSON tables
plus a formatted text summary; trial 0 of the hybrid additionally persists
its forecaster checkpoint, per-series detections, and attributions so single
steps can be re-explained later without retraining.
"""

from __future__ import annotations

import json
import os
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from gridseer.baselines.neighbors import METRICS as NN_METRICS
from gridseer.baselines.neighbors import nn_distances
from gridseer.baselines.rocket import (
    MiniRocketConfig,
    minirocket_predict,
    minirocket_train,
)
from gridseer.core import (
    EventType,
    GeneratorConfig,
    LabeledDataset,
    dataset_digest,
    read_dataset,
    synth_generate,
)
from gridseer.detector import DetectorConfig, write_detection_csv
from gridseer.explain import Attribution, ExplainerConfig, write_attribution_csv
from gridseer.forecaster import TrainingConfig, load_model, save_model
from gridseer.metrics import (
    TrialReport,
    aggregate_trials,
    aupr,
    auroc,
    mds,
    mds_input_from_attributions,
    summary_stats,
    ttest_one_sided,
    write_boxplot_csv,
    write_summary_csv,
    write_summary_json,
    write_trials_csv,
)
from gridseer.pipeline import (
    HybridConfig,
    HybridModel,
    SeriesDetection,
    detect_series,
    explain_step,
    fit_hybrid,
    match_events,
    step_labels,
)
from gridseer.smoothing import save_state

__all__ = [
    "KNOWN_MODELS",
    "DatasetSpec",
    "ExperimentReport",
    "Failure",
    "RunConfig",
    "Trial0Bundle",
    "explain_at",
    "load_run_config",
    "load_trial0",
    "render_report",
    "run_config_from_dict",
    "run_config_to_dict",
    "run_experiment",
]

KNOWN_MODELS = ("hybrid", "nn_euclid", "nn_idtw", "nn_ddtw", "minirocket")

EXPLAINERS = ("surrogate", "shapley")

WORKERS_ENV = "GRIDSEER_WORKERS"


# ---------------------------------------------------------------------------
# Run configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DatasetSpec:
    """Where the run's dataset comes from: a generator or a CSV directory."""

    kind: str = "synth"
    path: str | None = None
    generator: GeneratorConfig = field(default_factory=GeneratorConfig)

    def __post_init__(self) -> None:
        if self.kind not in ("synth", "csv"):
            raise ValueError(f"dataset kind must be 'synth' or 'csv', got {self.kind!r}")
        if self.kind == "csv":
            if not self.path:
                raise ValueError("csv dataset requires a path")
            if not Path(self.path).is_dir():
                raise ValueError(f"dataset directory not found: {self.path}")


@dataclass(frozen=True)
class RunConfig:
    """Everything one benchmark run depends on; (config, base_seed) fixes all
    outputs byte for byte."""

    dataset: DatasetSpec = field(default_factory=DatasetSpec)
    models: tuple[str, ...] = KNOWN_MODELS
    trials: int = 35
    base_seed: int = 0
    hybrid: HybridConfig = field(default_factory=HybridConfig)
    rocket: MiniRocketConfig = field(default_factory=MiniRocketConfig)
    explainer: ExplainerConfig = field(default_factory=ExplainerConfig)
    betas: tuple[int, ...] = (5, 10, 15)
    out_dir: str = "runs/latest"
    timings: bool = False

    def __post_init__(self) -> None:
        models = tuple(self.models)
        if not models:
            raise ValueError("models must not be empty")
        unknown = [m for m in models if m not in KNOWN_MODELS]
        if unknown:
            raise ValueError(
                f"unknown models {unknown}; expected a subset of {list(KNOWN_MODELS)}"
            )
        if len(set(models)) != len(models):
            raise ValueError("models must not repeat")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        betas = tuple(int(b) for b in self.betas)
        if not betas or any(b < 1 for b in betas):
            raise ValueError("betas must be positive integers")
        if list(betas) != sorted(set(betas)):
            raise ValueError("betas must be strictly increasing")
        if not str(self.out_dir):
            raise ValueError("out_dir must be a non-empty path")
        if self.explainer.baseline is not None:
            raise ValueError(
                "explainer baselines are derived per flagged step; leave unset"
            )
        object.__setattr__(self, "models", models)
        object.__setattr__(self, "betas", betas)

    def trial_seed(self, trial: int) -> int:
        return self.base_seed + trial


def _tupled(value):
    return tuple(value) if isinstance(value, list) else value


def _config_from_dict(cls, doc: dict, context: str):
    if not isinstance(doc, dict):
        raise ValueError(f"{context} must be a JSON object")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(doc) - known)
    if unknown:
        raise ValueError(f"unknown {context} keys: {unknown}")
    return cls(**{k: _tupled(v) for k, v in doc.items()})


def run_config_from_dict(doc: dict) -> RunConfig:
    """Build a validated RunConfig from plain JSON data."""
    if not isinstance(doc, dict):
        raise ValueError("run config must be a JSON object")
    known = {f.name for f in fields(RunConfig)}
    unknown = sorted(set(doc) - known)
    if unknown:
        raise ValueError(f"unknown run config keys: {unknown}")
    kwargs = dict(doc)
    if "dataset" in kwargs:
        ds = dict(kwargs["dataset"])
        if "generator" in ds:
            gen = dict(ds["generator"])
            if "event_types" in gen:
                gen["event_types"] = tuple(
                    EventType.parse(t) for t in gen["event_types"]
                )
            ds["generator"] = _config_from_dict(GeneratorConfig, gen, "generator")
        kwargs["dataset"] = _config_from_dict(DatasetSpec, ds, "dataset")
    if "hybrid" in kwargs:
        hy = dict(kwargs["hybrid"])
        if "training" in hy:
            hy["training"] = _config_from_dict(TrainingConfig, hy["training"], "training")
        if "detector" in hy:
            hy["detector"] = _config_from_dict(DetectorConfig, hy["detector"], "detector")
        kwargs["hybrid"] = _config_from_dict(HybridConfig, hy, "hybrid")
    if "rocket" in kwargs:
        kwargs["rocket"] = _config_from_dict(MiniRocketConfig, kwargs["rocket"], "rocket")
    if "explainer" in kwargs:
        kwargs["explainer"] = _config_from_dict(
            ExplainerConfig, kwargs["explainer"], "explainer"
        )
    for key in ("models", "betas"):
        if key in kwargs:
            kwargs[key] = _tupled(kwargs[key])
    return RunConfig(**kwargs)


def run_config_to_dict(cfg: RunConfig) -> dict:
    """JSON-safe dict; inverse of run_config_from_dict."""
    doc = asdict(cfg)
    doc["dataset"]["generator"]["event_types"] = [
        str(t) for t in cfg.dataset.generator.event_types
    ]
    return json.loads(json.dumps(doc, default=_json_default))


def _json_default(obj):
    if isinstance(obj, EventType):
        return str(obj)
    if isinstance(obj, (np.integer, np.floating)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def load_run_config(path) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"run config not found: {path}")
    with open(path, encoding="utf-8") as fh:
        return run_config_from_dict(json.load(fh))


# ---------------------------------------------------------------------------
# Dataset handling and validation
# ---------------------------------------------------------------------------


def build_dataset(cfg: RunConfig) -> LabeledDataset:
    """The run's single dataset; synth generation uses the base seed only, so
    trial seeds vary the models, never the data."""
    if cfg.dataset.kind == "csv":
        return read_dataset(cfg.dataset.path)
    return synth_generate(cfg.dataset.generator, seed=cfg.base_seed)


def _series_is_disturbed(events) -> bool:
    return len(events) > 0


def validate_dataset(dataset: LabeledDataset, cfg: RunConfig) -> None:
    """Fail fast when a requested model cannot be scored on this dataset."""
    if not dataset.train_idx:
        raise ValueError("training split is empty")
    if not dataset.test_idx:
        raise ValueError("test split is empty")
    series_models = [m for m in cfg.models if m != "hybrid"]
    if series_models:
        for name, idx in (("training", dataset.train_idx), ("test", dataset.test_idx)):
            kinds = {_series_is_disturbed(dataset.series[i][1]) for i in idx}
            if kinds != {True, False}:
                raise ValueError(
                    f"series-level baselines need both normal and disturbed series "
                    f"in the {name} split"
                )
    if "hybrid" in cfg.models:
        any_event = any(dataset.series[i][1] for i in dataset.test_idx)
        if not any_event:
            raise ValueError(
                "per-timestep metrics need at least one labeled event in the test split"
            )


# ---------------------------------------------------------------------------
# Per-model trials
# ---------------------------------------------------------------------------


def _series_margin_labels(dataset: LabeledDataset):
    labels = np.array(
        [_series_is_disturbed(dataset.series[i][1]) for i in dataset.test_idx]
    )
    return labels


def _nn_trial(dataset: LabeledDataset, metric: str, seed: int) -> TrialReport:
    """1NN margin: distance to nearest normal minus nearest disturbed train
    series; positive when the query sits closer to disturbed examples."""
    normal_idx = [i for i in dataset.train_idx if not dataset.series[i][1]]
    disturbed_idx = [i for i in dataset.train_idx if dataset.series[i][1]]
    order = list(dataset.train_idx)
    scores = []
    for idx in dataset.test_idx:
        query = dataset.series[idx][0]
        dists = nn_distances(dataset, query, metric)
        d_norm = min(dists[order.index(i)] for i in normal_idx)
        d_dist = min(dists[order.index(i)] for i in disturbed_idx)
        scores.append(d_norm - d_dist)
    labels = _series_margin_labels(dataset)
    scores = np.asarray(scores)
    return TrialReport(
        model=f"nn_{metric}",
        seed=seed,
        auroc=auroc(scores, labels),
        aupr=aupr(scores, labels),
        detection_unit="series",
    )


def _rocket_trial(
    dataset: LabeledDataset, cfg: MiniRocketConfig, seed: int
) -> TrialReport:
    """Ridge-head margin: best disturbance-class score minus the normal score."""
    model = minirocket_train(dataset, cfg, seed)
    test_series = [dataset.series[i][0] for i in dataset.test_idx]
    _, class_scores = minirocket_predict(model, test_series)
    classes = list(model.classes)
    if len(classes) == 1:
        margins = np.zeros(len(test_series))
    else:
        normal_col = classes.index(EventType.NORMAL) if EventType.NORMAL in classes else None
        cols = np.arange(class_scores.shape[1])
        if normal_col is None:
            margins = class_scores.max(axis=1)
        else:
            other = cols[cols != normal_col]
            margins = class_scores[:, other].max(axis=1) - class_scores[:, normal_col]
    labels = _series_margin_labels(dataset)
    return TrialReport(
        model="minirocket",
        seed=seed,
        auroc=auroc(margins, labels),
        aupr=aupr(margins, labels),
        detection_unit="series",
    )


@dataclass(frozen=True, eq=False)
class _HybridTrialOutput:
    report: TrialReport
    detections: tuple[SeriesDetection, ...]
    model: HybridModel
    matched: tuple[tuple[str, int, str, int], ...]  # (series_id, step, root, event_start)
    attributions: dict[str, tuple[Attribution, ...]]


def _hybrid_trial(dataset: LabeledDataset, cfg: RunConfig, seed: int) -> _HybridTrialOutput:
    model = fit_hybrid(dataset, cfg.hybrid, seed=seed)
    detections = []
    scores_parts, labels_parts = [], []
    matched: list[tuple[str, int, str, int]] = []
    per_explainer: dict[str, list[Attribution]] = {name: [] for name in EXPLAINERS}
    roots: list[str] = []
    for idx in dataset.test_idx:
        series, events = dataset.series[idx]
        det = detect_series(model, series, dataset.series_ids[idx])
        detections.append(det)
        truth_mask = step_labels(series.n_steps, events)
        start = det.result.detect_from
        scores_parts.append(det.result.scores[start - det.result.start :])
        labels_parts.append(truth_mask[start:])
        for event, step in match_events(det, events):
            if step is None:
                continue
            atts = explain_step(model, det, step, cfg=cfg.explainer, seed=seed)
            for name in EXPLAINERS:
                per_explainer[name].append(atts[name])
            roots.append(event.root_channel)
            matched.append((det.series_id, step, event.root_channel, event.start_idx))
    scores = np.concatenate(scores_parts)
    labels = np.concatenate(labels_parts)
    mds_values: dict[tuple[str, int], float] = {}
    if roots:
        for name in EXPLAINERS:
            for beta in cfg.betas:
                inp = mds_input_from_attributions(per_explainer[name], roots, beta)
                mds_values[(name, beta)] = mds(inp)
    report = TrialReport(
        model="hybrid",
        seed=seed,
        auroc=auroc(scores, labels),
        aupr=aupr(scores, labels),
        mds=mds_values,
        detection_unit="timestep",
    )
    return _HybridTrialOutput(
        report=report,
        detections=tuple(detections),
        model=model,
        matched=tuple(matched),
        attributions={name: tuple(atts) for name, atts in per_explainer.items()},
    )


def _worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ValueError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from exc
    if n < 1:
        raise ValueError(f"{WORKERS_ENV} must be >= 1, got {n}")
    return n


def _trial_job(args):
    """Top-level so worker processes can unpickle it."""
    model_name, dataset, cfg, trial = args
    seed = cfg.trial_seed(trial)
    started = time.perf_counter()
    try:
        if model_name == "hybrid":
            report = _hybrid_trial(dataset, cfg, seed).report
        elif model_name == "minirocket":
            report = _rocket_trial(dataset, cfg.rocket, seed)
        else:
            raise ValueError(f"not a per-trial model: {model_name}")
        elapsed = time.perf_counter() - started
        if cfg.timings:
            report = replace(report, seconds=elapsed)
        return trial, report, None
    except Exception:  # noqa: BLE001 - a failed trial is data, not a crash
        return trial, None, traceback.format_exc(limit=8)


# ---------------------------------------------------------------------------
# The experiment
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Failure:
    model: str
    trial: int
    seed: int
    error: str


@dataclass(frozen=True, eq=False)
class ExperimentReport:
    config: RunConfig
    digest: str
    reports: dict[str, tuple[TrialReport, ...]]
    summary: dict
    ttests: dict[str, tuple[float | None, float | None, str]]
    failures: tuple[Failure, ...]
    out_dir: Path

    @property
    def total_trials(self) -> int:
        per_trial_models = [m for m in self.config.models if m in ("hybrid", "minirocket")]
        return len(per_trial_models) * self.config.trials

    @property
    def exit_code(self) -> int:
        if not self.failures:
            return 0
        if self.total_trials and len(self.failures) * 2 > self.total_trials:
            return 2
        return 1


def run_experiment(cfg: RunConfig) -> ExperimentReport:
    dataset = build_dataset(cfg)
    validate_dataset(dataset, cfg)
    digest = dataset_digest(dataset)
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    reports: dict[str, list[TrialReport]] = {m: [] for m in cfg.models}
    failures: list[Failure] = []

    # Deterministic whole-series baselines: one computation, identical rows.
    for model_name in cfg.models:
        if not model_name.startswith("nn_"):
            continue
        metric = model_name.split("_", 1)[1]
        assert metric in NN_METRICS
        started = time.perf_counter()
        try:
            base = _nn_trial(dataset, metric, cfg.base_seed)
        except Exception:  # noqa: BLE001
            failures.append(
                Failure(model_name, -1, cfg.base_seed, traceback.format_exc(limit=8))
            )
            continue
        if cfg.timings:
            base = replace(base, seconds=time.perf_counter() - started)
        reports[model_name] = [
            replace(base, seed=cfg.trial_seed(t)) for t in range(cfg.trials)
        ]

    trial0_bundle: _HybridTrialOutput | None = None
    jobs = []
    for model_name in cfg.models:
        if model_name not in ("hybrid", "minirocket"):
            continue
        first = 0
        if model_name == "hybrid":
            # trial 0 runs in-process so its artifacts can be persisted
            started = time.perf_counter()
            try:
                trial0_bundle = _hybrid_trial(dataset, cfg, cfg.trial_seed(0))
                report = trial0_bundle.report
                if cfg.timings:
                    report = replace(report, seconds=time.perf_counter() - started)
                reports["hybrid"].append(report)
            except Exception:  # noqa: BLE001
                failures.append(
                    Failure("hybrid", 0, cfg.trial_seed(0), traceback.format_exc(limit=8))
                )
            first = 1
        jobs.extend(
            (model_name, dataset, cfg, trial) for trial in range(first, cfg.trials)
        )

    workers = _worker_count()
    if jobs:
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(_trial_job, jobs))
        else:
            results = [_trial_job(job) for job in jobs]
        for (model_name, _, _, trial), (_, report, error) in zip(jobs, results):
            if error is not None:
                failures.append(Failure(model_name, trial, cfg.trial_seed(trial), error))
            else:
                reports[model_name].append(report)

    for model_name in reports:
        reports[model_name].sort(key=lambda r: r.seed)

    completed = {m: tuple(rs) for m, rs in reports.items() if rs}
    flat = [r for rs in completed.values() for r in rs]
    summary = aggregate_trials(flat) if flat else {}
    ttests = _hybrid_ttests(completed)

    result = ExperimentReport(
        config=cfg,
        digest=digest,
        reports=completed,
        summary=summary,
        ttests=ttests,
        failures=tuple(failures),
        out_dir=out_dir,
    )
    _write_outputs(result, dataset, trial0_bundle)
    return result


def _hybrid_ttests(completed) -> dict[str, tuple[float | None, float | None, str]]:
    """H0 per benchmark: its mean trial auROC is at least the hybrid's."""
    out: dict[str, tuple[float | None, float | None, str]] = {}
    if "hybrid" not in completed:
        return out
    ours = [r.auroc for r in completed["hybrid"]]
    for model_name, rows in completed.items():
        if model_name == "hybrid":
            continue
        bench = [r.auroc for r in rows]
        try:
            stat, p = ttest_one_sided(bench, ours)
            out[model_name] = (stat, p, "")
        except ValueError as exc:
            out[model_name] = (None, None, str(exc))
    return out


# ---------------------------------------------------------------------------
# Output files
# ---------------------------------------------------------------------------


def _write_outputs(
    result: ExperimentReport,
    dataset: LabeledDataset,
    trial0: _HybridTrialOutput | None,
) -> None:
    out = result.out_dir
    cfg = result.config
    with open(out / "config.json", "w", encoding="utf-8") as fh:
        json.dump(run_config_to_dict(cfg), fh, indent=2, sort_keys=True)
        fh.write("\n")
    (out / "dataset_digest.txt").write_text(result.digest + "\n")

    flat = [r for rs in result.reports.values() for r in rs]
    if flat:
        write_trials_csv(flat, out / "trials.csv")
        write_summary_csv(result.summary, out / "summary.csv")
        write_summary_json(result.summary, out / "summary.json")
        write_boxplot_csv(result.summary, out / "boxplot.csv")
    _write_ttest_csv(result, out / "ttest.csv")
    _write_mds_csv(result, out / "mds.csv")
    (out / "report.txt").write_text(render_report(result))

    if trial0 is not None:
        t0 = out / "trial0"
        t0.mkdir(parents=True, exist_ok=True)
        save_model(trial0.model.forecaster, t0 / "forecaster.npz")
        meta = {
            "season_length": trial0.model.season_length,
            "seed": cfg.trial_seed(0),
            "series_ids": [det.series_id for det in trial0.detections],
        }
        with open(t0 / "meta.json", "w", encoding="utf-8") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")
        for det in trial0.detections:
            save_state(det.state, t0 / f"smoothing_{det.series_id}.json")
            write_detection_csv(
                det.series, det.forecast, det.result, t0 / f"detections_{det.series_id}.csv"
            )
        for name, atts in trial0.attributions.items():
            if atts:
                write_attribution_csv(atts, t0 / f"attributions_{name}.csv")
        _write_matched_csv(trial0.matched, t0 / "matched_events.csv")


def _write_ttest_csv(result: ExperimentReport, path: Path) -> None:
    import csv as _csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = _csv.writer(fh)
        writer.writerow(["benchmark", "metric", "statistic", "p_value", "note"])
        for bench in sorted(result.ttests):
            stat, p, note = result.ttests[bench]
            writer.writerow(
                [
                    bench,
                    "auroc",
                    "" if stat is None else repr(stat),
                    "" if p is None else repr(p),
                    note,
                ]
            )


def _write_mds_csv(result: ExperimentReport, path: Path) -> None:
    import csv as _csv

    rows = result.reports.get("hybrid", ())
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = _csv.writer(fh)
        writer.writerow(["explainer", "beta", "n", "mean", "std"])
        for name in EXPLAINERS:
            for beta in result.config.betas:
                values = [r.mds[(name, beta)] for r in rows if (name, beta) in r.mds]
                if not values:
                    continue
                st = summary_stats(values)
                writer.writerow([name, beta, st.n, repr(st.mean), repr(st.std)])


def _write_matched_csv(matched, path: Path) -> None:
    import csv as _csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = _csv.writer(fh)
        writer.writerow(["series_id", "flagged_step", "root_channel", "event_start"])
        for series_id, step, root, event_start in matched:
            writer.writerow([series_id, step, root, event_start])


def render_report(result: ExperimentReport) -> str:
    """Human-readable run summary with aligned metric tables."""
    cfg = result.config
    lines = []
    lines.append(f"dataset digest: {result.digest}")
    lines.append(
        f"models: {', '.join(cfg.models)}   trials: {cfg.trials}   "
        f"base seed: {cfg.base_seed}"
    )
    lines.append("")
    lines.append("metric summary over trials (mean +/- std)")
    header = f"{'model':<12} {'unit':<9} {'auroc':>18} {'aupr':>18} {'seconds':>18}"
    lines.append(header)
    lines.append("-" * len(header))
    for model_name in cfg.models:
        rows = result.reports.get(model_name)
        if not rows:
            lines.append(f"{model_name:<12} {'-':<9} {'(no completed trials)':>18}")
            continue
        stats = result.summary[model_name]
        unit = rows[0].detection_unit
        cells = []
        for metric in ("auroc", "aupr", "seconds"):
            st = stats[metric]
            cells.append(f"{st.mean:.4f} +/- {st.std:.4f}")
        lines.append(
            f"{model_name:<12} {unit:<9} {cells[0]:>18} {cells[1]:>18} {cells[2]:>18}"
        )
    if result.ttests:
        lines.append("")
        lines.append("one-sided t-test on trial auROC (H0: benchmark >= hybrid)")
        lines.append(f"{'benchmark':<12} {'statistic':>12} {'p_value':>12}")
        for bench in sorted(result.ttests):
            stat, p, note = result.ttests[bench]
            if stat is None:
                lines.append(f"{bench:<12} {'n/a':>12} {'n/a':>12}  {note}")
            else:
                lines.append(f"{bench:<12} {stat:>12.4f} {p:>12.4g}")
    mds_rows = result.reports.get("hybrid", ())
    have_mds = any(r.mds for r in mds_rows)
    if have_mds:
        lines.append("")
        lines.append("root-cause hit rate at detected steps (share of events with the")
        lines.append("true channel ranked in the top beta)")
        lines.append(f"{'explainer':<12} {'beta':>6} {'n':>4} {'mean':>10} {'std':>10}")
        for name in EXPLAINERS:
            for beta in cfg.betas:
                values = [r.mds[(name, beta)] for r in mds_rows if (name, beta) in r.mds]
                if not values:
                    continue
                st = summary_stats(values)
                lines.append(
                    f"{name:<12} {beta:>6} {st.n:>4} {st.mean:>10.4f} {st.std:>10.4f}"
                )
    lines.append("")
    if result.failures:
        lines.append(f"failed trials: {len(result.failures)} of {result.total_trials}")
        for f in result.failures:
            first = f.error.strip().splitlines()[-1]
            lines.append(f"  {f.model} trial {f.trial} (seed {f.seed}): {first}")
    else:
        lines.append("failed trials: none")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Re-explaining a persisted run
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Trial0Bundle:
    """Reconstructed trial-0 stack for explain queries against a finished run."""

    config: RunConfig
    dataset: LabeledDataset
    model: HybridModel


def load_trial0(out_dir) -> Trial0Bundle:
    """Rebuild the trial-0 hybrid from a run directory without retraining."""
    out = Path(out_dir)
    config_path = out / "config.json"
    if not config_path.is_file():
        raise FileNotFoundError(f"no run config at {config_path}")
    cfg = load_run_config(config_path)
    checkpoint = out / "trial0" / "forecaster.npz"
    if not checkpoint.is_file():
        raise FileNotFoundError(
            f"no trained artifacts at {checkpoint}; run the benchmark first"
        )
    with open(out / "trial0" / "meta.json", encoding="utf-8") as fh:
        meta = json.load(fh)
    dataset = build_dataset(cfg)
    forecaster = load_model(checkpoint)
    model = HybridModel(
        season_length=int(meta["season_length"]),
        config=cfg.hybrid,
        forecaster=forecaster,
    )
    return Trial0Bundle(config=cfg, dataset=dataset, model=model)


def explain_at(
    bundle: Trial0Bundle, series_id: str, step: int, seed: int | None = None
) -> tuple[dict[str, Attribution], SeriesDetection]:
    """Re-run both explainers at one flagged step of a persisted run."""
    ids = list(bundle.dataset.series_ids)
    if series_id not in ids:
        raise ValueError(f"unknown series id {series_id!r}; run ids: {ids}")
    idx = ids.index(series_id)
    if idx not in bundle.dataset.test_idx:
        raise ValueError(f"series {series_id!r} is not in the test split")
    series = bundle.dataset.series[idx][0]
    det = detect_series(bundle.model, series, series_id)
    use_seed = bundle.config.trial_seed(0) if seed is None else seed
    atts = explain_step(
        bundle.model, det, step, cfg=bundle.config.explainer, seed=use_seed
    )
    return atts, det
