"""Evaluation metrics: ranking areas, root-cause discovery, trial statistics.

auROC is the probability that a random positive outranks a random negative
(ties count one half); auPR is the interpolation-free step sum of precision
over recall increments.  The mean discovery score is the fraction of detected
anomalies whose true root channel the explainer ranked within the top beta.
The significance test is a one-sided Welch test of H0: the benchmark's mean
is at least ours, degenerating to a one-sample test when one side has zero
variance (deterministic baselines).  Trial aggregation uses the population
standard deviation so a deterministic model over any number of trials reports
a std of exactly zero.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats as _stats

__all__ = [
    "MdsInput",
    "SummaryStats",
    "TrialReport",
    "aggregate_trials",
    "aupr",
    "auroc",
    "mds",
    "mds_input_from_attributions",
    "summary_stats",
    "ttest_one_sided",
    "write_boxplot_csv",
    "write_summary_csv",
    "write_summary_json",
    "write_trials_csv",
]


def _scores_labels(scores, labels):
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    if s.ndim != 1 or y.ndim != 1 or s.shape[0] != y.shape[0]:
        raise ValueError("scores and labels must be 1-d and equally long")
    if s.shape[0] == 0:
        raise ValueError("scores are empty")
    if not np.all(np.isfinite(s)):
        raise ValueError("scores contain non-finite values")
    return s, y.astype(bool)


def auroc(scores, labels) -> float:
    """Probability a random positive scores above a random negative (ties half)."""
    s, y = _scores_labels(scores, labels)
    n_pos = int(y.sum())
    n_neg = y.shape[0] - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("auroc requires both classes present")
    ranks = _stats.rankdata(s)  # average ranks give ties weight one half
    u = ranks[y].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def aupr(scores, labels) -> float:
    """Step-summed precision-recall area, no interpolation, ties grouped."""
    s, y = _scores_labels(scores, labels)
    n_pos = int(y.sum())
    if n_pos == 0:
        raise ValueError("aupr requires at least one positive")
    order = np.argsort(-s, kind="stable")
    y_sorted = y[order]
    s_sorted = s[order]
    tp = np.cumsum(y_sorted)
    # evaluate only at the last index of each tie group, so equal scores
    # enter the confusion counts together
    boundary = np.r_[np.nonzero(np.diff(s_sorted))[0], s.shape[0] - 1]
    precision = tp[boundary] / (boundary + 1.0)
    recall = tp[boundary] / n_pos
    return float(np.sum(np.diff(np.r_[0.0, recall]) * precision))


@dataclass(frozen=True)
class MdsInput:
    """Explainer ranks of the true root channel, one per detected anomaly."""

    ranks: tuple[int, ...]
    beta: int

    def __post_init__(self) -> None:
        ranks = tuple(int(r) for r in self.ranks)
        if any(r < 1 for r in ranks):
            raise ValueError("ranks are 1-based and must be >= 1")
        if self.beta < 1:
            raise ValueError("beta must be a positive integer")
        object.__setattr__(self, "ranks", ranks)

    @property
    def card(self) -> int:
        return len(self.ranks)


def mds(inp: MdsInput) -> float:
    """Fraction of detected anomalies with true root channel ranked <= beta."""
    if inp.card == 0:
        raise ValueError(
            "mds is undefined with zero detected anomalies; "
            "the detector found nothing to explain"
        )
    hits = sum(1 for r in inp.ranks if r <= inp.beta)
    return hits / inp.card


def mds_input_from_attributions(attributions, root_channels, beta: int) -> MdsInput:
    """Pair each detection's attribution with its true root channel."""
    if len(attributions) != len(root_channels):
        raise ValueError("one root channel required per attribution")
    ranks = tuple(
        att.channel_rank(root) for att, root in zip(attributions, root_channels)
    )
    return MdsInput(ranks, beta)


def ttest_one_sided(benchmark, ours) -> tuple[float, float]:
    """Welch one-sided test of H0: mean(benchmark) >= mean(ours).

    Returns (statistic, p); the statistic is positive when ours is ahead and
    p is the upper-tail probability, so small p rejects the benchmark.  A
    zero-variance sample (deterministic model, or a single value) reduces the
    test to a one-sample comparison against that constant.
    """
    b = np.asarray(benchmark, dtype=np.float64)
    o = np.asarray(ours, dtype=np.float64)
    if b.ndim != 1 or o.ndim != 1 or b.shape[0] < 1 or o.shape[0] < 1:
        raise ValueError("both samples must be nonempty 1-d arrays")
    if b.shape[0] < 2 and o.shape[0] < 2:
        raise ValueError("at least one sample needs two or more values")
    var_b = float(b.var(ddof=1)) if b.shape[0] > 1 else 0.0
    var_o = float(o.var(ddof=1)) if o.shape[0] > 1 else 0.0
    diff = float(o.mean() - b.mean())
    if var_b == 0.0 and var_o == 0.0:
        if diff == 0.0:
            raise ValueError(
                "both samples are constant and equal; the statistic is undefined"
            )
        return (math.copysign(math.inf, diff), 0.0 if diff > 0 else 1.0)
    if var_b == 0.0:
        se = math.sqrt(var_o / o.shape[0])
        df = o.shape[0] - 1
    elif var_o == 0.0:
        se = math.sqrt(var_b / b.shape[0])
        df = b.shape[0] - 1
    else:
        vb = var_b / b.shape[0]
        vo = var_o / o.shape[0]
        se = math.sqrt(vb + vo)
        df = (vb + vo) ** 2 / (vb**2 / (b.shape[0] - 1) + vo**2 / (o.shape[0] - 1))
    statistic = diff / se
    p = float(_stats.t.sf(statistic, df))
    return (float(statistic), p)


@dataclass(frozen=True)
class TrialReport:
    """One model's metrics for one trial; mds keys are (explainer, beta)."""

    model: str
    seed: int
    auroc: float
    aupr: float
    mds: dict[tuple[str, int], float] = field(default_factory=dict)
    seconds: float = 0.0
    detection_unit: str = "timestep"

    def __post_init__(self) -> None:
        for name, value in (("auroc", self.auroc), ("aupr", self.aupr)):
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        for key, value in self.mds.items():
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"mds{key} must lie in [0, 1], got {value}")
        if self.seconds < 0:
            raise ValueError("seconds must be nonnegative")


@dataclass(frozen=True)
class SummaryStats:
    """Distribution summary for one metric over trials (population std)."""

    n: int
    mean: float
    std: float
    minimum: float
    maximum: float
    q1: float
    median: float
    q3: float
    whisker_low: float
    whisker_high: float


def summary_stats(values) -> SummaryStats:
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1 or v.shape[0] == 0:
        raise ValueError("need a nonempty 1-d sample")
    if np.all(v == v[0]):  # constant sample: exact zero spread, no fp residue
        c = float(v[0])
        return SummaryStats(int(v.shape[0]), c, 0.0, c, c, c, c, c, c, c)
    q1, median, q3 = (float(q) for q in np.quantile(v, [0.25, 0.5, 0.75]))
    iqr = q3 - q1
    inside = v[(v >= q1 - 1.5 * iqr) & (v <= q3 + 1.5 * iqr)]
    return SummaryStats(
        n=int(v.shape[0]),
        mean=float(v.mean()),
        std=float(v.std()),
        minimum=float(v.min()),
        maximum=float(v.max()),
        q1=q1,
        median=median,
        q3=q3,
        whisker_low=float(inside.min()),
        whisker_high=float(inside.max()),
    )


def _metric_columns(report: TrialReport) -> dict[str, float]:
    cols = {"auroc": report.auroc, "aupr": report.aupr, "seconds": report.seconds}
    for (explainer, beta), value in report.mds.items():
        cols[f"mds_{explainer}_beta{beta}"] = value
    return cols


def aggregate_trials(reports) -> dict[str, dict[str, SummaryStats]]:
    """Per-model, per-metric distribution summaries over trials."""
    grouped: dict[str, dict[str, list[float]]] = {}
    for report in reports:
        metrics = grouped.setdefault(report.model, {})
        for name, value in _metric_columns(report).items():
            metrics.setdefault(name, []).append(value)
    return {
        model: {name: summary_stats(vals) for name, vals in metrics.items()}
        for model, metrics in grouped.items()
    }


def write_summary_csv(summary, path) -> None:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["model", "metric", "n", "mean", "std", "min", "q1", "median", "q3", "max"]
        )
        for model in sorted(summary):
            for metric in sorted(summary[model]):
                st = summary[model][metric]
                writer.writerow(
                    [model, metric, st.n]
                    + [
                        repr(v)
                        for v in (
                            st.mean, st.std, st.minimum, st.q1,
                            st.median, st.q3, st.maximum,
                        )
                    ]
                )


def write_summary_json(summary, path) -> None:
    payload = {
        model: {metric: vars(st) for metric, st in metrics.items()}
        for model, metrics in summary.items()
    }
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def write_boxplot_csv(summary, path) -> None:
    """Box geometry (median, quartiles, 1.5 IQR whiskers) for external plotting."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["model", "metric", "median", "q1", "q3", "whisker_low", "whisker_high"]
        )
        for model in sorted(summary):
            for metric in sorted(summary[model]):
                st = summary[model][metric]
                writer.writerow(
                    [model, metric]
                    + [repr(v) for v in (st.median, st.q1, st.q3, st.whisker_low, st.whisker_high)]
                )


def write_trials_csv(reports, path) -> None:
    path = Path(path)
    mds_keys = sorted({k for r in reports for k in _metric_columns(r) if k.startswith("mds_")})
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["model", "seed", "auroc", "aupr", "seconds", *mds_keys])
        for r in reports:
            cols = _metric_columns(r)
            writer.writerow(
                [r.model, r.seed, repr(r.auroc), repr(r.aupr), repr(r.seconds)]
                + [repr(cols[k]) if k in cols else "" for k in mds_keys]
            )
