"""Pairwise distance matrices over feature groups and whole tables.

Matrices are plain dense ``(n, n)`` float arrays: symmetric, non-negative,
zero on the diagonal.
"""
from __future__ import annotations

import enum
from pathlib import Path

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .data import FeatureGroup, FeatureKind, MixedDataTable, require_rows
from .exceptions import IncompatibleMetric, NonFiniteValue


class Metric(enum.Enum):
    EUCLIDEAN = "euclidean"
    ABSOLUTE_DIFFERENCE = "absolute_difference"
    HAMMING = "hamming"
    GOWER = "gower"

    @classmethod
    def parse(cls, text) -> "Metric":
        if isinstance(text, cls):
            return text
        key = str(text).strip().lower().replace("-", "_")
        aliases = {"abs": "absolute_difference", "manhattan": "absolute_difference",
                   "cityblock": "absolute_difference"}
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise IncompatibleMetric(f"unknown metric {text!r}") from None


def _check_compatible(group: FeatureGroup, metric: Metric) -> None:
    if metric in (Metric.EUCLIDEAN, Metric.ABSOLUTE_DIFFERENCE) and not group.is_numeric:
        raise IncompatibleMetric(f"{metric.value} needs numeric features, got {list(group.names)}")
    if metric is Metric.HAMMING and not group.is_categorical:
        raise IncompatibleMetric(f"hamming needs categorical/ordinal features, got {list(group.names)}")


def pairwise_distances(group: FeatureGroup, metric="euclidean") -> np.ndarray:
    metric = Metric.parse(metric)
    _check_compatible(group, metric)
    if metric is Metric.GOWER:
        return _gower(group.values(), [f.kind for f in group.features])

    X = group.values()
    if not np.all(np.isfinite(X)):
        raise NonFiniteValue("non-finite value in feature group")
    if X.shape[0] == 0:
        return np.zeros((0, 0))
    # scipy's "hamming" is already the mismatch fraction over columns
    name = {Metric.EUCLIDEAN: "euclidean",
            Metric.ABSOLUTE_DIFFERENCE: "cityblock",
            Metric.HAMMING: "hamming"}[metric]
    return squareform(pdist(X, metric=name))


def gower_distances(table: MixedDataTable) -> np.ndarray:
    """Range-normalised mean dissimilarity over all features of ``table``.

    Numeric and ordinal features contribute ``|xi - xj| / range`` (0 for a
    constant column), categorical features contribute 0/1 mismatch.
    """
    require_rows(table)
    return _gower(table.encoded, [f.kind for f in table.schema])


def _gower(X: np.ndarray, kinds) -> np.ndarray:
    n, p = X.shape
    if not np.all(np.isfinite(X)):
        raise NonFiniteValue("non-finite value in table")
    cat = np.array([k is FeatureKind.CATEGORICAL for k in kinds], dtype=bool)
    condensed = np.zeros(n * (n - 1) // 2)
    if (~cat).any():
        num = X[:, ~cat]
        span = np.ptp(num, axis=0)
        keep = span > 0  # constant columns contribute nothing
        if keep.any():
            condensed += pdist(num[:, keep] / span[keep], "cityblock")
    if cat.any():
        condensed += pdist(X[:, cat], "hamming") * cat.sum()
    condensed /= p
    # round-off can push a few entries a hair above 1
    return squareform(np.clip(condensed, 0.0, 1.0))


def check_distance_matrix(dm: np.ndarray) -> np.ndarray:
    dm = np.asarray(dm, dtype=float)
    if dm.ndim != 2 or dm.shape[0] != dm.shape[1]:
        raise ValueError(f"distance matrix must be square, got shape {dm.shape}")
    if not np.all(np.isfinite(dm)):
        raise NonFiniteValue("distance matrix has non-finite entries")
    if np.any(dm < 0):
        raise ValueError("distance matrix has negative entries")
    return dm


def save_distance_matrix(path, dm: np.ndarray) -> None:
    np.savetxt(Path(path), dm, fmt="%.17g", delimiter=",")


def load_distance_matrix(path) -> np.ndarray:
    return check_distance_matrix(np.loadtxt(Path(path), delimiter=",", ndmin=2))
