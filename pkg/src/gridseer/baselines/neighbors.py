"""One-nearest-neighbor classification over whole-series distances."""

from __future__ import annotations

import numpy as np

from gridseer.core import EventType, LabeledDataset, series_label
from gridseer.baselines.warping import ddtw, idtw

METRICS = ("euclid", "idtw", "ddtw")


def euclid_distance(x_a, x_b) -> float:
    """Flat Euclidean distance between two equal-shape series matrices."""
    a = x_a.values if hasattr(x_a, "values") else np.asarray(x_a, dtype=np.float64)
    b = x_b.values if hasattr(x_b, "values") else np.asarray(x_b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.sqrt(np.sum((a - b) ** 2)))


def _metric_fn(metric: str):
    if metric == "euclid":
        return euclid_distance
    if metric == "idtw":
        return idtw
    if metric == "ddtw":
        return ddtw
    raise ValueError(f"unknown metric {metric!r}; expected one of {METRICS}")


def nn_distances(train: LabeledDataset, query, metric: str = "euclid") -> np.ndarray:
    """Distance from the query to every training series, in split order."""
    fn = _metric_fn(metric)
    pairs = train.train_pairs
    if not pairs:
        raise ValueError("training split is empty")
    return np.array([fn(s, query) for s, _ in pairs])


def nn_classify(train: LabeledDataset, query, metric: str = "euclid") -> EventType:
    """Label of the nearest training series; ties break to the lowest index."""
    distances = nn_distances(train, query, metric)
    nearest = int(np.argmin(distances))  # argmin keeps the first minimum
    return series_label(train.train_pairs[nearest][1])
