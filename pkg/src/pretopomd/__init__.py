"""Pretopological clustering for mixed numeric and categorical data."""
from .data import Feature, FeatureKind, MixedDataTable, Schema, feature_group, infer_schema, load_csv
from .datagen import GeneratorConfig, generate
from .distances import Metric, gower_distances, pairwise_distances
from .dnf import evaluate, parse_rule
from .estimator import PrenetworkSpec, PretopoMD
from .hierarchy import (
    attraction_matrix,
    export_dendrogram,
    extract_clusters,
    iterative_pseudoclosure,
    quasi_hierarchy,
    quasi_structural_analysis,
)
from .metrics import (
    SimpleEmbedding,
    calinski_harabasz,
    davies_bouldin,
    evaluate_clustering,
    silhouette,
    simple_embedding,
)
from .seeding import SeedConfig, set_seeds
from .space import PretopologicalSpace, Prenetwork, ThresholdConfig, build_prenetwork

__version__ = "0.1.0"
