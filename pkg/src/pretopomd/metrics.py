"""Internal validity indices and the numeric embedding they are computed on.

Labels use ``-1`` for outliers; outliers are left out of every index.
Calinski-Harabasz and Davies-Bouldin work on a Euclidean embedding,
Silhouette on any precomputed distance matrix (Gower for mixed data).
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .data import FeatureKind, MixedDataTable, require_rows
from .distances import gower_distances
from .exceptions import LengthMismatch, UndefinedIndex

OUTLIER = -1


class SimpleEmbedding(TransformerMixin, BaseEstimator):
    """Deterministic numeric coding of a mixed table.

    Numeric and ordinal columns are z-scored (population sd; constant
    columns become zeros). Categorical columns are one-hot encoded with
    indicators scaled by ``1/sqrt(2)``, so a mismatch on one categorical
    feature adds exactly 1 to the squared distance.
    """

    def fit(self, X: MixedDataTable, y=None):
        require_rows(X)
        self.schema_ = X.schema
        enc = X.encoded
        self.mean_ = enc.mean(axis=0)
        sd = enc.std(axis=0)
        self.scale_ = np.where(sd > 0, sd, 1.0)
        return self

    def transform(self, X: MixedDataTable) -> np.ndarray:
        check_is_fitted(self, "schema_")
        if X.schema != self.schema_:
            raise ValueError("table schema differs from the one seen in fit")
        require_rows(X)
        enc = X.encoded
        blocks = []
        for j, feat in enumerate(self.schema_):
            col = enc[:, j]
            if feat.kind is FeatureKind.CATEGORICAL:
                onehot = col[:, None] == np.arange(len(feat.levels))[None, :]
                blocks.append(onehot / math.sqrt(2))
            else:
                z = (col - self.mean_[j]) / self.scale_[j]
                if self.scale_[j] == 1.0 and np.all(col == self.mean_[j]):
                    z = np.zeros_like(col)
                blocks.append(z[:, None])
        return np.hstack(blocks)


def simple_embedding(table: MixedDataTable) -> np.ndarray:
    return SimpleEmbedding().fit_transform(table)


def _labels(labels) -> np.ndarray:
    if hasattr(labels, "labels"):
        labels = labels.labels
    return np.asarray(labels, dtype=int)


def _clustered(X, labels):
    """Drop outliers; return rows, labels and the distinct cluster ids."""
    labels = _labels(labels)
    if len(labels) != len(X):
        raise LengthMismatch(f"{len(labels)} labels for {len(X)} elements")
    keep = labels != OUTLIER
    ids = np.unique(labels[keep])
    if ids.size < 2:
        raise UndefinedIndex(f"need at least 2 clusters, got {ids.size}")
    return keep, labels[keep], ids


def calinski_harabasz(emb, labels) -> float:
    """Between/within dispersion ratio; ``inf`` when clusters have no spread."""
    emb = np.asarray(emb, dtype=float)
    keep, lab, ids = _clustered(emb, labels)
    X = emb[keep]
    n, k = len(X), ids.size
    center = X.mean(axis=0)
    between = within = 0.0
    for c in ids:
        members = X[lab == c]
        centroid = members.mean(axis=0)
        between += len(members) * np.sum((centroid - center) ** 2)
        within += np.sum((members - centroid) ** 2)
    if n == k or within == 0:
        return math.inf
    return float((between / (k - 1)) / (within / (n - k)))


def silhouette(dm, labels) -> float:
    """Mean silhouette over clustered elements; singletons score 0."""
    dm = np.asarray(dm, dtype=float)
    keep, lab, ids = _clustered(dm, labels)
    D = dm[np.ix_(keep, keep)]
    onehot = lab[:, None] == ids[None, :]
    counts = onehot.sum(axis=0)
    mean_to = (D @ onehot) / counts  # mean distance of each element to each cluster
    own = np.searchsorted(ids, lab)
    own_size = counts[own]
    rows = np.arange(len(lab))
    # own cluster mean excludes the element itself (its self-distance is 0)
    a = mean_to[rows, own] * own_size / np.maximum(own_size - 1, 1)
    others = mean_to.copy()
    others[rows, own] = np.inf
    b = others.min(axis=1)
    denom = np.maximum(a, b)
    s = np.where(denom > 0, (b - a) / np.where(denom > 0, denom, 1.0), 0.0)
    s[own_size == 1] = 0.0
    return float(s.mean())


def davies_bouldin(emb, labels) -> float:
    """Average worst-case (scatter_i + scatter_j) / centroid distance."""
    emb = np.asarray(emb, dtype=float)
    keep, lab, ids = _clustered(emb, labels)
    X = emb[keep]
    centroids = np.array([X[lab == c].mean(axis=0) for c in ids])
    scatter = np.array([np.mean(np.linalg.norm(X[lab == c] - centroids[i], axis=1))
                        for i, c in enumerate(ids)])
    sep = np.linalg.norm(centroids[:, None, :] - centroids[None, :, :], axis=2)
    total = scatter[:, None] + scatter[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(sep > 0, total / sep, math.inf)
    np.fill_diagonal(ratio, -math.inf)
    return float(np.mean(ratio.max(axis=1)))


@dataclass
class MetricReport:
    calinski_harabasz: float | None
    silhouette: float | None
    davies_bouldin: float | None
    n_clusters: int
    n_outliers: int
    embedding: str = "simple"

    def as_dict(self) -> dict:
        out = asdict(self)
        for key in ("calinski_harabasz", "silhouette", "davies_bouldin"):
            if out[key] is not None and not math.isfinite(out[key]):
                out[key] = "inf" if out[key] > 0 else "-inf"
        return out


def _or_none(fn, *args):
    try:
        return fn(*args)
    except UndefinedIndex:
        return None


def evaluate_clustering(table: MixedDataTable, labels) -> MetricReport:
    """CH and DB on :func:`simple_embedding`, Silhouette on Gower distances."""
    labels = _labels(labels)
    if len(labels) != table.n:
        raise LengthMismatch(f"{len(labels)} labels for {table.n} rows")
    emb = simple_embedding(table)
    n_clusters = int(np.unique(labels[labels != OUTLIER]).size)
    n_outliers = int(np.sum(labels == OUTLIER))
    if n_clusters < 2:
        return MetricReport(None, None, None, n_clusters, n_outliers)
    return MetricReport(_or_none(calinski_harabasz, emb, labels),
                        _or_none(silhouette, gower_distances(table), labels),
                        _or_none(davies_bouldin, emb, labels),
                        n_clusters, n_outliers)
