"""Command-line surface: synth, run, explain, evaluate.

Every subcommand is config-driven JSON in, files out.  `run` executes the
multi-trial benchmark and returns 0 only when every trial completed (2 when
more than half failed); `synth` materializes a dataset and prints its digest;
`explain` re-ranks channels at one flagged step of a finished run; `evaluate`
recomputes ranking metrics from existing score files.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from gridseer.core import GeneratorConfig, dataset_digest, synth_generate, write_dataset
from gridseer.experiment import (
    DatasetSpec,
    explain_at,
    load_run_config,
    load_trial0,
    run_config_from_dict,
    run_experiment,
)
from gridseer.metrics import aupr, auroc

__all__ = ["main"]


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 2


def _load_json(path: str) -> dict:
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"config file not found: {p}")
    with open(p, encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise ValueError("config must be a JSON object")
    return doc


# ---------------------------------------------------------------------------
# synth
# ---------------------------------------------------------------------------


def _generator_from_doc(doc: dict) -> tuple[GeneratorConfig, int]:
    """Accept either a full run config (uses its dataset block) or a bare
    generator object; returns the generator plus the config's seed."""
    if "dataset" in doc or "models" in doc or "trials" in doc:
        cfg = run_config_from_dict(doc)
        if cfg.dataset.kind != "synth":
            raise ValueError("synth needs a generator config, not a csv dataset")
        return cfg.dataset.generator, cfg.base_seed
    from gridseer.experiment import _config_from_dict  # shared strict parser

    gen = dict(doc)
    seed = int(gen.pop("seed", 0))
    if "event_types" in gen:
        from gridseer.core import EventType

        gen["event_types"] = tuple(EventType.parse(t) for t in gen["event_types"])
    return _config_from_dict(GeneratorConfig, gen, "generator"), seed


def cmd_synth(args) -> int:
    try:
        doc = _load_json(args.config)
        generator, seed = _generator_from_doc(doc)
    except (OSError, ValueError, KeyError) as exc:
        return _fail(str(exc))
    if args.seed is not None:
        seed = args.seed
    dataset = synth_generate(generator, seed=seed)
    out = Path(args.out)
    write_dataset(dataset, out)
    digest = dataset_digest(dataset)
    n_events = sum(len(events) for _, events in dataset.series)
    print(f"wrote {dataset.n_series} series to {out}")
    print(
        f"train {len(dataset.train_idx)}  test {len(dataset.test_idx)}  "
        f"events {n_events}  seed {seed}"
    )
    print(f"digest: {digest}")
    return 0


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------


def cmd_run(args) -> int:
    try:
        cfg = load_run_config(args.config)
        if args.trials is not None:
            cfg = replace(cfg, trials=args.trials)
        if args.seed is not None:
            cfg = replace(cfg, base_seed=args.seed)
        if args.out is not None:
            cfg = replace(cfg, out_dir=args.out)
        if args.timings:
            cfg = replace(cfg, timings=True)
        if args.dataset is not None:
            cfg = replace(
                cfg, dataset=DatasetSpec(kind="csv", path=args.dataset)
            )
    except (OSError, ValueError) as exc:
        return _fail(str(exc))
    try:
        result = run_experiment(cfg)
    except (OSError, ValueError) as exc:
        return _fail(str(exc))
    sys.stdout.write(open(result.out_dir / "report.txt", encoding="utf-8").read())
    print(f"artifacts: {result.out_dir}")
    if result.failures:
        print(
            f"warning: {len(result.failures)} of {result.total_trials} trials failed",
            file=sys.stderr,
        )
    return result.exit_code


# ---------------------------------------------------------------------------
# explain
# ---------------------------------------------------------------------------


def cmd_explain(args) -> int:
    try:
        bundle = load_trial0(args.run)
        atts, det = explain_at(bundle, args.series, args.step, seed=args.seed)
    except (OSError, ValueError) as exc:
        return _fail(str(exc))
    flagged_channels = det.result.flagged_channels(args.step)
    print(f"series {args.series}  step {args.step}  flagged channels: "
          f"{', '.join(flagged_channels) or '(aggregate only)'}")
    names = atts["surrogate"].channel_names
    order = {
        key: np.argsort(att.rank, kind="stable") for key, att in atts.items()
    }
    header = f"{'rank':<6} {'surrogate':<22} {'shapley':<22}"
    print(header)
    print("-" * len(header))
    for r in range(len(names)):
        cells = []
        for key in ("surrogate", "shapley"):
            att = atts[key]
            i = order[key][r]
            cells.append(f"{att.channel_names[i]:<8} {att.importance[i]:>10.4f}")
        print(f"{r + 1:<6} {cells[0]:<22} {cells[1]:<22}")
    for key, att in atts.items():
        if float(np.max(np.abs(att.importance))) == 0.0:
            print(
                f"warning: {key} scores were constant under masking; "
                "ranking falls back to channel order",
                file=sys.stderr,
            )
    return 0


# ---------------------------------------------------------------------------
# evaluate
# ---------------------------------------------------------------------------


def _read_scores(path: Path) -> tuple[np.ndarray, np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        cols = reader.fieldnames or []
        if "score" not in cols or "label" not in cols:
            raise ValueError(
                f"{path}: expected 'score' and 'label' columns, found {cols}"
            )
        scores, labels = [], []
        for row in reader:
            scores.append(float(row["score"]))
            labels.append(int(row["label"]))
    if not scores:
        raise ValueError(f"{path}: no score rows")
    return np.asarray(scores), np.asarray(labels, dtype=bool)


def cmd_evaluate(args) -> int:
    rows = []
    for raw in args.scores:
        path = Path(raw)
        if not path.is_file():
            return _fail(f"score file not found: {path}")
        try:
            scores, labels = _read_scores(path)
            rows.append((path, scores.shape[0], auroc(scores, labels), aupr(scores, labels)))
        except ValueError as exc:
            return _fail(str(exc))
    width = max(len(str(p)) for p, *_ in rows)
    print(f"{'file':<{width}} {'n':>8} {'auroc':>10} {'aupr':>10}")
    for path, n, roc, pr in rows:
        print(f"{str(path):<{width}} {n:>8} {roc:>10.4f} {pr:>10.4f}")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gridseer",
        description="Interpretable hybrid anomaly detection for multichannel time series.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="generate a labeled synthetic dataset")
    p_synth.add_argument("--config", required=True, help="generator or run config JSON")
    p_synth.add_argument("--out", required=True, help="output dataset directory")
    p_synth.add_argument("--seed", type=int, default=None, help="override the seed")
    p_synth.set_defaults(func=cmd_synth)

    p_run = sub.add_parser("run", help="multi-trial benchmark over one dataset")
    p_run.add_argument("--config", required=True, help="run config JSON")
    p_run.add_argument("--trials", type=int, default=None, help="override trial count")
    p_run.add_argument("--seed", type=int, default=None, help="override the base seed")
    p_run.add_argument("--out", default=None, help="override the output directory")
    p_run.add_argument(
        "--dataset", default=None, help="override with a CSV dataset directory"
    )
    p_run.add_argument(
        "--timings", action="store_true", help="record wall time per trial"
    )
    p_run.set_defaults(func=cmd_run)

    p_explain = sub.add_parser(
        "explain", help="rank channels at one flagged step of a finished run"
    )
    p_explain.add_argument("--run", required=True, help="run output directory")
    p_explain.add_argument("--series", required=True, help="series id")
    p_explain.add_argument("--step", type=int, required=True, help="flagged step index")
    p_explain.add_argument(
        "--seed", type=int, default=None, help="explainer seed (default: trial 0 seed)"
    )
    p_explain.set_defaults(func=cmd_explain)

    p_eval = sub.add_parser(
        "evaluate", help="ranking metrics from existing score files"
    )
    p_eval.add_argument(
        "scores", nargs="+", help="CSV files with 'score' and 'label' columns"
    )
    p_eval.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
