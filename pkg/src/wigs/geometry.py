"""Nearest-labeled distance bookkeeping for the candidate pool.

The selection rules need, for every pool candidate, its distance to the
nearest labeled point in feature space and in output space, plus raw
pairwise access for the product / weighted-sum criteria.  Feature
distances only shrink as points are acquired, so they are maintained
incrementally (one new column per acquisition).  Output distances depend
on the current model's predictions and are rebuilt from scratch whenever
the model is refit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset, SplitState


def pairwise_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Euclidean distances between rows of a (n, p) and rows of b (m, p).

    One fixed formula shared by the full build and the incremental update,
    so both paths produce bit-identical values for the same pair.
    """
    diff = a[:, None, :] - b[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


@dataclass
class DistanceCache:
    """Distances from every pool candidate to the current labeled set.

    dx_pair / dy_pair are (pool x labeled) matrices; dx_min / dy_min their
    row minima.  A cache belongs to exactly one replication run.
    """

    labeled_features: np.ndarray  # (L, p)
    labeled_targets: np.ndarray   # (L,)
    pool_features: np.ndarray     # (P, p)
    labeled_idx: np.ndarray       # (L,) dataset indices
    pool_idx: np.ndarray          # (P,) dataset indices
    dx_pair: np.ndarray           # (P, L)
    dy_pair: np.ndarray           # (P, L)
    dx_min: np.ndarray            # (P,) maintained incrementally
    dy_min: np.ndarray            # (P,) rebuilt with each refit

    @property
    def n_pool(self) -> int:
        return self.pool_features.shape[0]


def _dy_pairs(predictions: np.ndarray, labeled_targets: np.ndarray) -> np.ndarray:
    return np.abs(predictions[:, None] - labeled_targets[None, :])


def build_cache(dataset: Dataset, split: SplitState, predictions: np.ndarray) -> DistanceCache:
    """Exact distance cache for an initial labeled/pool partition.

    ``predictions`` are the current model's outputs for the pool, in pool
    order; output distances compare them against the true labels of the
    labeled set.
    """
    if len(split.labeled_idx) == 0:
        raise ValueError("labeled set is empty")
    predictions = np.asarray(predictions, dtype=float)
    if predictions.shape != (len(split.pool_idx),):
        raise ValueError(
            f"predictions length {predictions.shape} does not match pool size {len(split.pool_idx)}"
        )
    labeled_features = dataset.features[split.labeled_idx]
    pool_features = dataset.features[split.pool_idx]
    labeled_targets = dataset.targets[split.labeled_idx]
    dx_pair = pairwise_distances(pool_features, labeled_features)
    dy_pair = _dy_pairs(predictions, labeled_targets)
    return DistanceCache(
        labeled_features=labeled_features,
        labeled_targets=labeled_targets,
        pool_features=pool_features,
        labeled_idx=np.array(split.labeled_idx, dtype=np.int64),
        pool_idx=np.array(split.pool_idx, dtype=np.int64),
        dx_pair=dx_pair,
        dy_pair=dy_pair,
        dx_min=dx_pair.min(axis=1) if dx_pair.size else np.zeros(0),
        dy_min=dy_pair.min(axis=1) if dy_pair.size else np.zeros(0),
    )


def update_after_acquisition(
    cache: DistanceCache,
    acquired: int,
    true_label: float,
    predictions: np.ndarray,
) -> DistanceCache:
    """Move pool candidate ``acquired`` (pool position) into the labeled set.

    Feature distances gain one column (distances to the new point) and lose
    the acquired row; output distances are rebuilt from ``predictions``,
    the refit model's outputs for the remaining pool.
    """
    if not 0 <= acquired < cache.n_pool:
        raise IndexError(f"acquired position {acquired} not in pool of size {cache.n_pool}")
    predictions = np.asarray(predictions, dtype=float)
    if predictions.shape != (cache.n_pool - 1,):
        raise ValueError("predictions must cover the pool minus the acquired candidate")

    keep = np.ones(cache.n_pool, dtype=bool)
    keep[acquired] = False
    new_point = cache.pool_features[acquired:acquired + 1]
    remaining = cache.pool_features[keep]

    labeled_features = np.vstack([cache.labeled_features, new_point])
    labeled_targets = np.append(cache.labeled_targets, float(true_label))
    new_col = pairwise_distances(remaining, new_point)  # (P-1, 1)
    dy_pair = _dy_pairs(predictions, labeled_targets)
    return DistanceCache(
        labeled_features=labeled_features,
        labeled_targets=labeled_targets,
        pool_features=remaining,
        labeled_idx=np.append(cache.labeled_idx, cache.pool_idx[acquired]),
        pool_idx=cache.pool_idx[keep],
        dx_pair=np.hstack([cache.dx_pair[keep], new_col]),
        dy_pair=dy_pair,
        dx_min=np.minimum(cache.dx_min[keep], new_col[:, 0]),
        dy_min=dy_pair.min(axis=1) if dy_pair.size else np.zeros(0),
    )


def normalize_phi(values: np.ndarray) -> np.ndarray:
    """Min-max map of a nonnegative distance collection onto [0, 1].

    Degenerate collections (max == min) map to all zeros.  Applied per
    iteration, separately to the feature-distance and output-distance
    pairwise collections, before they enter the weighted additive score.
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("cannot normalize an empty collection")
    lo = values.min()
    hi = values.max()
    if hi == lo:
        return np.zeros_like(values)
    return (values - lo) / (hi - lo)
