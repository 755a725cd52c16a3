"""Local channel attribution for flagged anomalies.

Two model-agnostic explainers over a black-box anomaly score evaluated on a
lookback window ending at the flagged step:

- a perturbation surrogate: Gaussian jitter at channel scale plus random
  masking of whole channels to a baseline window, followed by a locally
  weighted linear fit whose coefficient magnitudes are the importances;
- Shapley values with channels as players and baseline substitution as
  absence, computed by exact subset enumeration for small channel counts and
  by permutation sampling otherwise.

Both return an Attribution whose rank function maps each channel to a
position in 1..K (1 = most important, ties broken by channel index).
Perturbations modulate only channel amplitudes; the temporal ordering inside
the window is never shuffled, so score functions sensitive to sequence
structure see realistic neighbors.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "Attribution",
    "ExplainerConfig",
    "shapley_explain",
    "surrogate_explain",
    "write_attribution_csv",
]

_RIDGE = 1e-6
_EXACT_AUTO_LIMIT = 12
_EXACT_HARD_LIMIT = 20


@dataclass(frozen=True)
class ExplainerConfig:
    """Perturbation and estimation budget for both explainers.

    kernel_width None means the 0.75 * sqrt(n_channels) default, resolved per
    call; baseline None means the per-channel mean of the explained window.
    """

    n_samples: int = 1000
    kernel_width: float | None = None
    shapley_mode: str = "auto"
    n_permutations: int = 2000
    baseline: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.n_samples < 10:
            raise ValueError("n_samples must be at least 10")
        if self.kernel_width is not None and not self.kernel_width > 0:
            raise ValueError("kernel_width must be positive")
        if self.shapley_mode not in ("auto", "exact", "sampling"):
            raise ValueError(f"unknown shapley_mode {self.shapley_mode!r}")
        if self.n_permutations < 1:
            raise ValueError("n_permutations must be positive")


@dataclass(frozen=True, eq=False)
class Attribution:
    """Per-channel importance and the induced rank bijection onto 1..K."""

    series_id: str
    step: int
    channel_names: tuple[str, ...]
    importance: np.ndarray
    rank: np.ndarray
    values: np.ndarray | None = None  # signed coefficients / Shapley values

    def __post_init__(self) -> None:
        imp = np.asarray(self.importance, dtype=np.float64)
        rank = np.asarray(self.rank, dtype=np.int64)
        k = len(self.channel_names)
        if imp.shape != (k,) or rank.shape != (k,):
            raise ValueError("importance and rank must have one entry per channel")
        if not np.all(np.isfinite(imp)) or np.any(imp < 0):
            raise ValueError("importance must be finite and nonnegative")
        if sorted(rank.tolist()) != list(range(1, k + 1)):
            raise ValueError("rank must be a bijection onto 1..K")
        order = np.argsort(rank)
        if np.any(np.diff(imp[order]) > 0):
            raise ValueError("rank order must not contradict importance order")
        object.__setattr__(self, "importance", imp)
        object.__setattr__(self, "rank", rank)

    def channel_rank(self, name: str) -> int:
        return int(self.rank[self.channel_names.index(name)])

    @property
    def top_channel(self) -> str:
        return self.channel_names[int(np.argmin(self.rank))]


def _ranks_from_importance(importance: np.ndarray) -> np.ndarray:
    k = importance.shape[0]
    order = np.lexsort((np.arange(k), -importance))  # descending, index tie-break
    ranks = np.empty(k, dtype=np.int64)
    ranks[order] = np.arange(1, k + 1)
    return ranks


def _window_matrix(x) -> np.ndarray:
    values = x.values if hasattr(x, "values") else np.asarray(x, dtype=np.float64)
    arr = np.array(values, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError("window must be 2-d (steps x channels) and nonempty")
    if not np.all(np.isfinite(arr)):
        raise ValueError("window contains non-finite values")
    return arr


def _resolve_baseline(cfg: ExplainerConfig, window: np.ndarray) -> np.ndarray:
    if cfg.baseline is None:
        return np.broadcast_to(window.mean(axis=0), window.shape).copy()
    base = np.asarray(cfg.baseline, dtype=np.float64)
    if base.ndim == 1:
        base = np.broadcast_to(base, window.shape).copy()
    if base.shape != window.shape:
        raise ValueError(
            f"baseline shape {base.shape} incompatible with window {window.shape}"
        )
    return base


def _names(channel_names, k: int) -> tuple[str, ...]:
    if channel_names is None:
        return tuple(f"ch_{i}" for i in range(k))
    names = tuple(str(n) for n in channel_names)
    if len(names) != k:
        raise ValueError(f"{len(names)} channel names for {k} channels")
    return names


def surrogate_explain(
    score_fn,
    x,
    cfg: ExplainerConfig | None = None,
    seed: int = 0,
    series_id: str = "",
    step: int = 0,
    channel_names=None,
) -> Attribution:
    """Locally weighted linear surrogate of the anomaly score around x.

    Each perturbation keeps a random subset of channels (the rest are masked
    to the baseline window) and jitters kept channels with Gaussian noise at
    that channel's scale.  The surrogate regresses the score on per-channel
    standardized mean deviations from baseline, weighted by an exponential
    locality kernel, with a small ridge term for stability.
    """
    cfg = cfg or ExplainerConfig()
    window = _window_matrix(x)
    n_steps, k = window.shape
    names = _names(channel_names, k)
    rng = np.random.default_rng(seed)
    baseline = _resolve_baseline(cfg, window)
    kernel_width = cfg.kernel_width if cfg.kernel_width is not None else 0.75 * math.sqrt(k)

    scales = window.std(axis=0)
    offsets = np.abs(window.mean(axis=0) - baseline.mean(axis=0))
    scales = np.maximum(scales, offsets)
    scales[scales < 1e-12] = 1.0

    keep = rng.random((cfg.n_samples, k)) < 0.5
    noise = rng.normal(0.0, 1.0, (cfg.n_samples, n_steps, k)) * scales
    scores = np.empty(cfg.n_samples)
    features = np.empty((cfg.n_samples, k))
    for i in range(cfg.n_samples):
        perturbed = np.where(keep[i], window + noise[i], baseline)
        scores[i] = float(score_fn(perturbed))
        features[i] = (perturbed - baseline).mean(axis=0) / scales
    if not np.all(np.isfinite(scores)):
        raise ValueError("score_fn returned non-finite values on perturbed windows")

    anchor = (window - baseline).mean(axis=0) / scales
    distances = np.sqrt(np.sum((features - anchor) ** 2, axis=1))
    with np.errstate(over="ignore"):  # extreme widths saturate to weight 0
        weights = np.exp(-((distances / kernel_width) ** 2))
    if weights.sum() < 1e-200:
        raise ValueError(
            "all perturbations received zero locality weight; kernel_width is too small"
        )

    design = np.column_stack([np.ones(cfg.n_samples), features])
    gram = (design.T * weights) @ design + _RIDGE * np.eye(k + 1)
    rhs = (design.T * weights) @ scores
    try:
        coef = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError as exc:
        raise ValueError("degenerate perturbation design matrix") from exc
    if not np.all(np.isfinite(coef)):
        raise ValueError("degenerate perturbation design matrix")

    values = coef[1:]
    # coefficients at numerical-noise level are exact zeros for ranking, so a
    # constant score degenerates to index order instead of noise order
    noise_floor = 1e-8 * max(1.0, float(np.max(np.abs(scores))))
    values[np.abs(values) <= noise_floor] = 0.0
    importance = np.abs(values)
    return Attribution(
        series_id, step, names, importance, _ranks_from_importance(importance), values
    )


def _subset_values(score_fn, window, baseline, k):
    """Score of every channel subset, absent channels replaced by baseline."""
    values = np.empty(1 << k)
    scratch = np.empty_like(window)
    for mask in range(1 << k):
        np.copyto(scratch, baseline)
        for ch in range(k):
            if mask >> ch & 1:
                scratch[:, ch] = window[:, ch]
        values[mask] = float(score_fn(scratch))
    return values


def _exact_shapley(score_fn, window, baseline, k) -> np.ndarray:
    v = _subset_values(score_fn, window, baseline, k)
    fact = [math.factorial(i) for i in range(k + 1)]
    weight = [fact[s] * fact[k - s - 1] / fact[k] for s in range(k)]
    phi = np.zeros(k)
    for mask in range(1 << k):
        size = mask.bit_count()
        for ch in range(k):
            if not mask >> ch & 1:
                phi[ch] += weight[size] * (v[mask | (1 << ch)] - v[mask])
    return phi


def _sampled_shapley(score_fn, window, baseline, k, n_permutations, rng) -> np.ndarray:
    phi = np.zeros(k)
    scratch = np.empty_like(window)
    for _ in range(n_permutations):
        order = rng.permutation(k)
        np.copyto(scratch, baseline)
        prev = float(score_fn(scratch))
        for ch in order:
            scratch[:, ch] = window[:, ch]
            cur = float(score_fn(scratch))
            phi[ch] += cur - prev
            prev = cur
    return phi / n_permutations


def shapley_explain(
    score_fn,
    x,
    cfg: ExplainerConfig | None = None,
    seed: int = 0,
    series_id: str = "",
    step: int = 0,
    channel_names=None,
) -> Attribution:
    """Shapley attribution with channels as players.

    A channel's absence means its column is replaced by the baseline window.
    Exact subset enumeration runs automatically for up to 12 channels (hard
    limit 20); beyond that, permutation sampling with cfg.n_permutations
    passes estimates the same quantity.  Exact mode satisfies efficiency:
    the values sum to score(x) - score(baseline).
    """
    cfg = cfg or ExplainerConfig()
    window = _window_matrix(x)
    k = window.shape[1]
    names = _names(channel_names, k)
    baseline = _resolve_baseline(cfg, window)

    mode = cfg.shapley_mode
    if mode == "auto":
        mode = "exact" if k <= _EXACT_AUTO_LIMIT else "sampling"
    if mode == "exact" and k > _EXACT_HARD_LIMIT:
        raise ValueError(
            f"exact enumeration over {k} channels is intractable "
            f"(limit {_EXACT_HARD_LIMIT}); use sampling mode"
        )
    if mode == "exact":
        values = _exact_shapley(score_fn, window, baseline, k)
    else:
        rng = np.random.default_rng(seed)
        values = _sampled_shapley(score_fn, window, baseline, k, cfg.n_permutations, rng)
    if not np.all(np.isfinite(values)):
        raise ValueError("score_fn returned non-finite values on substituted windows")

    importance = np.abs(values)
    return Attribution(
        series_id, step, names, importance, _ranks_from_importance(importance), values
    )


def write_attribution_csv(attributions, path) -> None:
    """One row per (anomaly, channel): series_id,step,channel,importance,rank."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["series_id", "step", "channel", "importance", "rank"])
        for att in attributions:
            for name, imp, rank in zip(att.channel_names, att.importance, att.rank):
                writer.writerow([att.series_id, att.step, name, repr(float(imp)), int(rank)])
