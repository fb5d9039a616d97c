"""scikit-learn style front end for the full clustering pipeline."""
from __future__ import annotations

import logging
from dataclasses import dataclass

from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_is_fitted

from . import dnf
from .data import FeatureKind, MixedDataTable, feature_group, require_rows
from .distances import Metric, gower_distances
from .exceptions import ConfigError
from .hierarchy import extract_clusters, quasi_structural_analysis
from .seeding import SeedConfig
from .space import PretopologicalSpace, ThresholdConfig, WeightScheme, build_prenetwork

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PrenetworkSpec:
    """Declaration of one prenetwork: which columns, which metric, which weights.

    ``threshold`` pins this prenetwork's threshold and bypasses the
    automatic formula for it.
    """

    name: str
    features: tuple[str, ...]
    metric: str = "euclidean"
    weights: str = "radius"
    threshold: float | None = None

    def __post_init__(self):
        dnf.Var(self.name)
        object.__setattr__(self, "features", tuple(self.features))
        object.__setattr__(self, "metric", Metric.parse(self.metric).value)
        object.__setattr__(self, "weights", WeightScheme.parse(self.weights).value)
        if not self.features:
            raise ConfigError("needs at least one feature", key=f"prenetwork.{self.name}.features")
        if self.threshold is not None and not self.threshold > 0:
            raise ConfigError("must be strictly positive", key=f"prenetwork.{self.name}.threshold")

    @classmethod
    def coerce(cls, spec) -> "PrenetworkSpec":
        if isinstance(spec, cls):
            return spec
        if isinstance(spec, dict):
            return cls(**spec)
        return cls(*spec)

    def as_dict(self) -> dict:
        return {"name": self.name, "features": list(self.features), "metric": self.metric,
                "weights": self.weights, "threshold": self.threshold}


def default_prenetworks(table: MixedDataTable) -> list[PrenetworkSpec]:
    """``Num`` (Euclidean over numeric columns) and ``Cat`` (Hamming over the rest)."""
    specs = []
    numeric = table.schema.names_of_kind(FeatureKind.NUMERIC)
    other = table.schema.names_of_kind(FeatureKind.CATEGORICAL, FeatureKind.ORDINAL)
    if numeric:
        specs.append(PrenetworkSpec("Num", tuple(numeric), "euclidean"))
    if other:
        specs.append(PrenetworkSpec("Cat", tuple(other), "hamming"))
    return specs


def as_table(X) -> MixedDataTable:
    if isinstance(X, MixedDataTable):
        return X
    if hasattr(X, "columns"):  # DataFrame-like
        return MixedDataTable.from_columns(X)
    if isinstance(X, dict):
        return MixedDataTable.from_columns(X)
    return MixedDataTable.from_array(X)


class PretopoMD(ClusterMixin, BaseEstimator):
    """Pretopological clustering of mixed numeric/categorical data.

    Each prenetwork is a radius (or similarity) graph over a column group.
    An element joins a set's pseudoclosure when ``rule`` holds over the
    per-prenetwork tests. Closures of small seeds are linked by attraction
    into a quasi-hierarchy, whose top-level sets become the clusters. Elements
    reached by none are labelled ``-1``.

    Parameters
    ----------
    prenetworks : list of PrenetworkSpec, dict or tuple, optional
        Defaults to :func:`default_prenetworks`.
    rule : str, optional
        Positive boolean rule over prenetwork names. Defaults to the OR of
        all prenetworks.
    seed_metric : {"gower", "euclidean"}
        Distance used to pick nearest-neighbour seeds.
    """

    def __init__(self, prenetworks=None, rule=None, th_qh=0.5, seed_size=3,
                 seed_strategy="nearest_neighbors", seed_metric="gower", rng_seed=0,
                 weighted_walk=False, threshold_power=1.0, closest_coeff=1.0,
                 square_lgth_coeff=1.0, area_method="max_distance_square",
                 manual_threshold=None, tie_break="index"):
        self.prenetworks = prenetworks
        self.rule = rule
        self.th_qh = th_qh
        self.seed_size = seed_size
        self.seed_strategy = seed_strategy
        self.seed_metric = seed_metric
        self.rng_seed = rng_seed
        self.weighted_walk = weighted_walk
        self.threshold_power = threshold_power
        self.closest_coeff = closest_coeff
        self.square_lgth_coeff = square_lgth_coeff
        self.area_method = area_method
        self.manual_threshold = manual_threshold
        self.tie_break = tie_break

    def _threshold_config(self, manual=None) -> ThresholdConfig:
        return ThresholdConfig(self.threshold_power, self.closest_coeff, self.square_lgth_coeff,
                               self.area_method,
                               manual if manual is not None else self.manual_threshold)

    def _seed_config(self) -> SeedConfig:
        return SeedConfig(self.seed_size, self.seed_strategy, self.rng_seed, self.weighted_walk)

    def resolve_prenetworks(self, table: MixedDataTable) -> list[PrenetworkSpec]:
        if self.prenetworks is None:
            return default_prenetworks(table)
        return [PrenetworkSpec.coerce(s) for s in self.prenetworks]

    def build_space(self, table: MixedDataTable) -> PretopologicalSpace:
        specs = self.resolve_prenetworks(table)
        if not specs:
            raise ConfigError("no prenetwork declared", key="prenetworks")
        nets = []
        for spec in specs:
            group = feature_group(table, spec.features,
                                  allow_mixed=Metric.parse(spec.metric) is Metric.GOWER)
            nets.append(build_prenetwork(group, spec.metric, self._threshold_config(spec.threshold),
                                         spec.weights, name=spec.name))
            log.debug("prenetwork %s: square_length=%.6g threshold=%.6g",
                      spec.name, nets[-1].square_length, nets[-1].threshold)
        rule = self.rule if self.rule is not None else " OR ".join(s.name for s in specs)
        return PretopologicalSpace.from_prenetworks(nets, rule)

    def _seed_distances(self, table):
        metric = str(self.seed_metric).lower()
        if metric == "gower":
            return gower_distances(table)
        if metric == "euclidean":
            from scipy.spatial.distance import pdist, squareform
            return squareform(pdist(table.encoded))
        raise ConfigError(f"unknown seed metric {self.seed_metric!r}", key="seed_metric")

    def fit(self, X, y=None):
        table = as_table(X)
        require_rows(table)
        if not self.th_qh > 0:
            raise ConfigError("must be strictly positive", key="th_qh")
        space = self.build_space(table)
        seed_config = self._seed_config()
        dm = self._seed_distances(table) if seed_config.d > 1 else None
        result = quasi_structural_analysis(space, seed_config, self.th_qh, dm, self.tie_break)
        assignment = extract_clusters(result.hierarchy, table.n)
        log.info("%d sets, %d clusters, %d outliers", len(result.family),
                 assignment.n_clusters, assignment.n_outliers)

        self.table_ = table
        self.space_ = space
        self.analysis_ = result
        self.hierarchy_ = result.hierarchy
        self.assignment_ = assignment
        self.labels_ = assignment.labels
        self.n_clusters_ = assignment.n_clusters
        return self

    def metadata(self) -> dict:
        """Every effective setting and derived quantity of the last fit."""
        check_is_fitted(self, "labels_")
        res = self.analysis_
        return {
            "n_elements": self.table_.n,
            "prenetworks": [s.as_dict() for s in self.resolve_prenetworks(self.table_)],
            "space": self.space_.describe(),
            "thresholds": self._threshold_config().as_dict(),
            "seeds": dict(self._seed_config().as_dict(), seed_metric=self.seed_metric,
                          incomplete=list(res.seeds.incomplete)),
            "th_qh": float(self.th_qh),
            "tie_break": self.tie_break,
            "counts": {"seeds": len(res.seeds), "distinct_sets": len(res.family),
                       "largest_set": max(len(s) for s in res.family),
                       "hierarchy_sets": len(res.hierarchy),
                       "hierarchy_links": int(res.hierarchy.adjacency.sum()),
                       "roots": len(res.hierarchy.roots),
                       "clusters": self.assignment_.n_clusters,
                       "outliers": self.assignment_.n_outliers},
        }

    def predict(self, X=None):
        """Labels of the fitted elements.

        Pretopological clusters are defined on a fixed universe, so new
        elements cannot be placed without refitting; passing ``X`` that
        differs from the training table raises.
        """
        check_is_fitted(self, "labels_")
        if X is not None and as_table(X) != self.table_:
            raise ValueError("PretopoMD is transductive; refit to label new data")
        return self.labels_
