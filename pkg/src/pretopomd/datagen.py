"""Synthetic mixed datasets from an isotropic Gaussian mixture.

Centers are rescaled to a mean pairwise distance of 1, samples are drawn
with equal component weights, and the trailing columns are cut at their
empirical quantiles to become categorical.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist

from .data import Feature, FeatureKind, MixedDataTable, Schema
from .exceptions import ConfigError


@dataclass(frozen=True)
class GeneratorConfig:
    n_samples: int = 500
    k: int = 3
    n_numeric: int = 5
    n_categorical: int = 5
    n_levels: int = 3
    std: float = 0.1
    rng_seed: int = 0

    def __post_init__(self):
        if self.n_numeric < 0 or self.n_categorical < 0 or self.n_numeric + self.n_categorical < 1:
            raise ConfigError("need at least one feature", key="generator.n_numeric")
        if self.k < 1:
            raise ConfigError("must be >= 1", key="generator.k")
        if self.n_samples < self.k:
            raise ConfigError("must be >= k", key="generator.n_samples")
        if self.n_levels < 2:
            raise ConfigError("must be >= 2", key="generator.n_levels")
        if not (math.isfinite(self.std) and self.std >= 0):
            raise ConfigError("must be finite and >= 0", key="generator.std")

    @property
    def dims(self) -> int:
        return self.n_numeric + self.n_categorical

    def as_dict(self) -> dict:
        return {"n_samples": self.n_samples, "k": self.k, "n_numeric": self.n_numeric,
                "n_categorical": self.n_categorical, "n_levels": self.n_levels,
                "std": self.std, "rng_seed": self.rng_seed}


@dataclass
class LabeledDataset:
    table: MixedDataTable
    ground_truth: np.ndarray
    centers: np.ndarray

    def truth_csv(self) -> str:
        lines = ["element_id,true_cluster"]
        lines += [f"{i},{int(c)}" for i, c in enumerate(self.ground_truth)]
        return "\n".join(lines) + "\n"


def generate_centers(k: int, dims: int, rng) -> np.ndarray:
    centers = rng.standard_normal((k, dims))
    if k >= 2:
        mean_dist = pdist(centers).mean()
        if mean_dist > 0:
            centers = centers / mean_dist
    return centers


def sample_mixture(config: GeneratorConfig, centers, rng, max_redraws: int = 1000):
    """Samples and component labels; each component weighs ``1/k``.

    Label draws are repeated until every component is used at least once.
    """
    centers = np.asarray(centers, dtype=float)
    k = centers.shape[0]
    n = config.n_samples
    for _ in range(max_redraws):
        labels = rng.integers(0, k, size=n)
        if n < k or np.unique(labels).size == k:
            break
    else:
        # essentially unreachable unless n is close to k
        labels[rng.choice(n, size=k, replace=False)] = rng.permutation(k)
    noise = rng.standard_normal((n, centers.shape[1])) * config.std
    return centers[labels] + noise, labels


def quantile_cuts(column, n_levels: int) -> np.ndarray:
    """Cut points at the ``j / n_levels`` empirical quantiles.

    The ``q`` quantile is the ``ceil(q * n)``-th smallest value.
    """
    x = np.sort(np.asarray(column, dtype=float))
    n = x.size
    ranks = [math.ceil(j * n / n_levels) for j in range(1, n_levels)]
    return x[[min(max(r, 1), n) - 1 for r in ranks]]


def quantile_categorize(column, n_levels: int) -> list[str]:
    """Level ``q<i>`` where ``i`` counts the cut points strictly below the value.

    Intervals are closed on the right: a value equal to a cut point stays in
    the lower level, so a constant column maps entirely to ``q0``.
    """
    if n_levels < 2:
        raise ConfigError("must be >= 2", key="n_levels")
    column = np.asarray(column, dtype=float)
    if column.size == 0:
        raise ValueError("cannot categorize an empty column")
    cuts = quantile_cuts(column, n_levels)
    idx = np.searchsorted(cuts, column, side="left")
    return [f"q{i}" for i in idx]


def generate(config: GeneratorConfig) -> LabeledDataset:
    rng = np.random.default_rng(config.rng_seed)
    centers = generate_centers(config.k, config.dims, rng)
    samples, labels = sample_mixture(config, centers, rng)

    levels = tuple(f"q{i}" for i in range(config.n_levels))
    features = [Feature(f"num{j}", FeatureKind.NUMERIC) for j in range(config.n_numeric)]
    features += [Feature(f"cat{j}", FeatureKind.CATEGORICAL, levels)
                 for j in range(config.n_categorical)]
    columns = [samples[:, j].tolist() for j in range(config.n_numeric)]
    columns += [quantile_categorize(samples[:, config.n_numeric + j], config.n_levels)
                for j in range(config.n_categorical)]
    rows = list(zip(*columns))
    table = MixedDataTable(Schema(tuple(features)), rows)
    return LabeledDataset(table, labels, centers)
