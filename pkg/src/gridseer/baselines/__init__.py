"""Classical comparators: warping distances, nearest neighbor, kernel features."""

from gridseer.baselines.neighbors import euclid_distance, nn_classify, nn_distances
from gridseer.baselines.rocket import (
    MiniRocketConfig,
    minirocket_classify,
    minirocket_features,
    minirocket_fit,
    minirocket_predict,
    minirocket_train,
)
from gridseer.baselines.warping import WarpMatrix, ddtw, dtw, idtw, warp_matrix

__all__ = [
    "MiniRocketConfig",
    "WarpMatrix",
    "ddtw",
    "dtw",
    "euclid_distance",
    "idtw",
    "minirocket_classify",
    "minirocket_features",
    "minirocket_fit",
    "minirocket_predict",
    "minirocket_train",
    "nn_classify",
    "nn_distances",
    "warp_matrix",
]
