"""Dynamic time warping distances for equal-length sequences.

The accumulated cost follows the textbook recurrence

    D[i, r] = cost[i, r] + min(D[i-1, r], D[i, r-1], D[i-1, r-1])

over the full warping window, with squared-difference step costs.  Two
multivariate strategies are provided: idtw warps each channel independently
and sums the per-channel distances; ddtw runs a single warp over
vector-valued steps with squared Euclidean costs.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numba import njit


@dataclass(frozen=True, eq=False)
class WarpMatrix:
    """Pairwise step costs and their accumulated dynamic-programming values."""

    cost: np.ndarray
    accumulated: np.ndarray

    @property
    def distance(self) -> float:
        return float(self.accumulated[-1, -1])


@njit(cache=True)
def _accumulate(cost):
    m, n = cost.shape
    acc = np.empty((m, n))
    acc[0, 0] = cost[0, 0]
    for i in range(1, m):
        acc[i, 0] = cost[i, 0] + acc[i - 1, 0]
    for r in range(1, n):
        acc[0, r] = cost[0, r] + acc[0, r - 1]
    for i in range(1, m):
        for r in range(1, n):
            best = acc[i - 1, r - 1]
            if acc[i - 1, r] < best:
                best = acc[i - 1, r]
            if acc[i, r - 1] < best:
                best = acc[i, r - 1]
            acc[i, r] = cost[i, r] + best
    return acc


@njit(cache=True)
def _dtw_1d(a, b):
    m = a.shape[0]
    acc = np.empty((m, m))
    for i in range(m):
        d = a[i] - b[0]
        c = d * d
        acc[i, 0] = c if i == 0 else c + acc[i - 1, 0]
    for r in range(1, m):
        d = a[0] - b[r]
        acc[0, r] = d * d + acc[0, r - 1]
    for i in range(1, m):
        for r in range(1, m):
            d = a[i] - b[r]
            best = acc[i - 1, r - 1]
            if acc[i - 1, r] < best:
                best = acc[i - 1, r]
            if acc[i, r - 1] < best:
                best = acc[i, r - 1]
            acc[i, r] = d * d + best
    return acc[m - 1, m - 1]


@njit(cache=True)
def _dtw_vec(a, b):
    m, k = a.shape
    acc = np.empty((m, m))
    for i in range(m):
        c = 0.0
        for ch in range(k):
            d = a[i, ch] - b[0, ch]
            c += d * d
        acc[i, 0] = c if i == 0 else c + acc[i - 1, 0]
    for r in range(1, m):
        c = 0.0
        for ch in range(k):
            d = a[0, ch] - b[r, ch]
            c += d * d
        acc[0, r] = c + acc[0, r - 1]
    for i in range(1, m):
        for r in range(1, m):
            c = 0.0
            for ch in range(k):
                d = a[i, ch] - b[r, ch]
                c += d * d
            best = acc[i - 1, r - 1]
            if acc[i - 1, r] < best:
                best = acc[i - 1, r]
            if acc[i, r - 1] < best:
                best = acc[i, r - 1]
            acc[i, r] = c + best
    return acc[m - 1, m - 1]


def _as_1d(x, name: str) -> np.ndarray:
    arr = np.ascontiguousarray(np.asarray(x, dtype=np.float64))
    if arr.ndim != 1:
        raise ValueError(f"{name} must be a 1-d sequence, got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise ValueError(f"{name} is empty")
    return arr


def _as_2d(x, name: str) -> np.ndarray:
    values = x.values if hasattr(x, "values") else np.asarray(x, dtype=np.float64)
    arr = np.ascontiguousarray(values, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-d (steps x channels), got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise ValueError(f"{name} is empty")
    return arr


def dtw(a, b) -> float:
    """Warping distance between two equal-length univariate sequences."""
    a_arr = _as_1d(a, "a")
    b_arr = _as_1d(b, "b")
    if a_arr.shape[0] != b_arr.shape[0]:
        raise ValueError(
            f"sequences must have equal length, got {a_arr.shape[0]} and {b_arr.shape[0]}"
        )
    return float(_dtw_1d(a_arr, b_arr))


def warp_matrix(a, b) -> WarpMatrix:
    """Full cost and accumulated matrices for inspection."""
    a_arr = _as_1d(a, "a")
    b_arr = _as_1d(b, "b")
    if a_arr.shape[0] != b_arr.shape[0]:
        raise ValueError("sequences must have equal length")
    cost = (a_arr[:, None] - b_arr[None, :]) ** 2
    return WarpMatrix(cost, _accumulate(cost))


def _check_same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")


def idtw(x_a, x_b) -> float:
    """Independent strategy: sum of per-channel warping distances."""
    a = _as_2d(x_a, "x_a")
    b = _as_2d(x_b, "x_b")
    _check_same_shape(a, b)
    total = 0.0
    for c in range(a.shape[1]):
        total += _dtw_1d(np.ascontiguousarray(a[:, c]), np.ascontiguousarray(b[:, c]))
    return float(total)


def ddtw(x_a, x_b) -> float:
    """Dependent strategy: one warp over squared-Euclidean vector step costs."""
    a = _as_2d(x_a, "x_a")
    b = _as_2d(x_b, "x_b")
    _check_same_shape(a, b)
    return float(_dtw_vec(a, b))


def write_distance_matrix_csv(distances: np.ndarray, row_ids, col_ids, path) -> None:
    """Dump a pairwise distance matrix with labeled rows/columns."""
    distances = np.asarray(distances)
    if distances.shape != (len(row_ids), len(col_ids)):
        raise ValueError("distance matrix shape does not match the id lists")
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["series_id", *col_ids])
        for rid, row in zip(row_ids, distances):
            writer.writerow([rid, *(repr(float(v)) for v in row)])
