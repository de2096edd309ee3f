"""KNN evaluation protocol, ablation variants and synthetic benchmarks."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

import numpy as np

from .dataset import DataMatrix, apply_standardization, column_moments, split_half
from .exceptions import ConfigError
from .solver import VARIANTS, HpwlParams, fit

logger = logging.getLogger(__name__)

DEFAULT_FEATURE_COUNTS = tuple(range(10, 201, 10))


def knn_predict(train_x, train_y, test_x, k_neighbors: int = 5) -> np.ndarray:
    """Majority vote among the ``k_neighbors`` nearest training rows.

    Distance ties keep the lower training index; vote ties go to the
    smallest label.
    """
    train_x = np.asarray(train_x, dtype=float)
    test_x = np.asarray(test_x, dtype=float)
    train_y = np.asarray(train_y)
    if len(train_x) == 0:
        raise ValueError("empty training set")
    if not 1 <= k_neighbors <= len(train_x):
        raise ValueError(f"k_neighbors must be in [1, {len(train_x)}], got {k_neighbors}")

    out = np.empty(len(test_x), dtype=train_y.dtype)
    for i, row in enumerate(test_x):
        diff = train_x - row
        dist = np.einsum("ij,ij->i", diff, diff)
        nearest = np.argsort(dist, kind="stable")[:k_neighbors]
        labels, counts = np.unique(train_y[nearest], return_counts=True)
        out[i] = labels[np.argmax(counts)]
    return out


def accuracy(y_true, y_pred) -> float:
    return float(np.mean(np.asarray(y_true) == np.asarray(y_pred)))


@dataclass
class SweepResult:
    """Accuracies over seeds (rows) and selected-feature counts (columns)."""

    feature_counts: np.ndarray
    accuracies: np.ndarray
    seeds: list
    variant: str = "full"
    mean: np.ndarray = field(init=False)
    std: np.ndarray = field(init=False)

    def __post_init__(self):
        self.feature_counts = np.asarray(self.feature_counts, dtype=int)
        self.accuracies = np.asarray(self.accuracies, dtype=float).reshape(
            len(self.seeds), len(self.feature_counts)
        )
        self.mean = self.accuracies.mean(axis=0)
        self.std = self.accuracies.std(axis=0)

    def rows(self) -> Iterable[tuple]:
        """``(variant, seed, feature_count, accuracy)`` in seed-major order."""
        for s, seed in enumerate(self.seeds):
            for c, count in enumerate(self.feature_counts):
                yield self.variant, int(seed), int(count), float(self.accuracies[s, c])

    def summary(self) -> dict:
        return {
            "variant": self.variant,
            "seeds": [int(s) for s in self.seeds],
            "feature_counts": self.feature_counts.tolist(),
            "mean": self.mean.tolist(),
            "std": self.std.tolist(),
            "overall_mean": float(self.accuracies.mean()) if self.accuracies.size else None,
        }


def valid_feature_counts(counts: Sequence[int], d: int) -> list[int]:
    kept = [int(c) for c in counts if 1 <= c <= d]
    skipped = [int(c) for c in counts if not 1 <= c <= d]
    if skipped:
        logger.warning("skipping feature counts %s (data has %d features)", skipped, d)
    return kept


def run_sweep(
    x: DataMatrix,
    params: Optional[HpwlParams] = None,
    variant: str = "full",
    repeats: Optional[int] = None,
    seeds: Sequence[int] = (0, 1, 2, 3, 4),
    feature_counts: Sequence[int] = DEFAULT_FEATURE_COUNTS,
    k_neighbors: int = 5,
    standardize: bool = True,
) -> SweepResult:
    """Repeated 50/50 evaluation of the selector with a KNN classifier.

    For every seed the rows are split in half, the selector sees only the
    training features, and the test half is classified from the top-ranked
    features for every requested count. With ``standardize`` the column
    moments come from the training half and are applied to both halves.
    """
    if x.labels is None:
        raise ConfigError("the sweep needs labelled data")
    if variant not in VARIANTS:
        raise ConfigError(f"unknown variant {variant!r}; choose from {VARIANTS}")
    seeds = list(seeds)
    if repeats is not None and repeats != len(seeds):
        raise ConfigError(f"repeats={repeats} but {len(seeds)} seeds were given")
    params = params or HpwlParams()
    counts = valid_feature_counts(feature_counts, x.n_features)

    acc = np.zeros((len(seeds), len(counts)))
    for s, seed in enumerate(seeds):
        split = split_half(x, seed)
        train, test = x.values[split.train_indices], x.values[split.test_indices]
        if standardize:
            mean, std = column_moments(train)
            train = apply_standardization(train, mean, std)
            test = apply_standardization(test, mean, std)
        ranking = fit(train, params, seed=seed, variant=variant)
        y_train, y_test = x.labels[split.train_indices], x.labels[split.test_indices]
        k = min(k_neighbors, len(train))
        for c, count in enumerate(counts):
            cols = ranking.top(count)
            pred = knn_predict(train[:, cols], y_train, test[:, cols], k)
            acc[s, c] = accuracy(y_test, pred)
        logger.info("variant %s seed %d: mean accuracy %.4f", variant, seed, acc[s].mean())
    return SweepResult(counts, acc, seeds, variant)


def grid_search(
    x: DataMatrix,
    grid: dict,
    base: Optional[HpwlParams] = None,
    **sweep_kwargs,
) -> tuple[HpwlParams, list[tuple[HpwlParams, float]]]:
    """Exhaustive search over parameter values by mean sweep accuracy.

    ``grid`` maps :class:`HpwlParams` field names to candidate values. Ties
    keep the earliest candidate in enumeration order.
    """
    base = base or HpwlParams()
    names = sorted(grid)
    scored = []
    for values in itertools.product(*(grid[k] for k in names)):
        params = replace(base, **dict(zip(names, values)))
        result = run_sweep(x, params, **sweep_kwargs)
        scored.append((params, float(result.accuracies.mean())))
    best = max(range(len(scored)), key=lambda i: (scored[i][1], -i))
    return scored[best][0], scored


def make_planted(
    n: int = 200,
    d: int = 400,
    n_informative: int = 20,
    n_clusters: int = 3,
    separation: float = 3.0,
    seed: int = 0,
) -> tuple[DataMatrix, np.ndarray]:
    """Gaussian clusters that differ only on a hidden subset of columns.

    Every column is unit-variance noise; on ``n_informative`` randomly placed
    columns each cluster is shifted by an independent ``N(0, separation^2)``
    offset. Smaller ``separation`` means more overlap.

    Returns the labelled data and the sorted indices of the informative columns.
    """
    rng = np.random.default_rng(seed)
    informative = np.sort(rng.choice(d, size=n_informative, replace=False))
    centers = rng.normal(scale=separation, size=(n_clusters, n_informative))
    labels = np.arange(n) % n_clusters
    rng.shuffle(labels)
    values = rng.normal(size=(n, d))
    values[:, informative] += centers[labels]
    return DataMatrix(values, labels), informative
