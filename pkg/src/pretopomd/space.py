"""Prenetworks, automatic thresholds and the pseudoclosure operator.

A :class:`PretopologicalSpace` bundles weighted graphs (one per feature
group), one threshold per graph and a positive rule. An element ``x`` joins
the pseudoclosure of ``A`` when the rule holds for the per-graph tests
"sum of weights of edges from x into A >= threshold".
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse

from . import dnf
from .data import FeatureGroup
from .distances import Metric, check_distance_matrix, pairwise_distances
from .exceptions import ConfigError, SingletonMatrix, UnknownPrenetworkInRule


class AreaMethod(enum.Enum):
    MAX_DISTANCE_SQUARE = "max_distance_square"
    BOUNDING_BOX = "bounding_box"

    @classmethod
    def parse(cls, text) -> "AreaMethod":
        if isinstance(text, cls):
            return text
        try:
            return cls(str(text).strip().lower())
        except ValueError:
            raise ConfigError(f"unknown area method {text!r}", key="area_method") from None


class WeightScheme(enum.Enum):
    RADIUS = "radius"
    SIMILARITY = "similarity"

    @classmethod
    def parse(cls, text) -> "WeightScheme":
        if isinstance(text, cls):
            return text
        try:
            return cls(str(text).strip().lower())
        except ValueError:
            raise ConfigError(f"unknown weight scheme {text!r}", key="weights") from None


@dataclass(frozen=True)
class ThresholdConfig:
    threshold_power: float = 1.0
    closest_coeff: float = 1.0
    square_lgth_coeff: float = 1.0
    area_method: AreaMethod = AreaMethod.MAX_DISTANCE_SQUARE
    manual_threshold: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "area_method", AreaMethod.parse(self.area_method))
        if not math.isfinite(self.threshold_power):
            raise ConfigError("must be finite", key="threshold_power")
        for key in ("closest_coeff", "square_lgth_coeff"):
            value = getattr(self, key)
            if not (math.isfinite(value) and value > 0):
                raise ConfigError("must be strictly positive", key=key)
        if self.manual_threshold is not None and not self.manual_threshold > 0:
            raise ConfigError("must be strictly positive", key="manual_threshold")

    def as_dict(self) -> dict:
        return {"threshold_power": self.threshold_power,
                "closest_coeff": self.closest_coeff,
                "square_lgth_coeff": self.square_lgth_coeff,
                "area_method": self.area_method.value,
                "manual_threshold": self.manual_threshold}


def _area(dm, method, points):
    if method is AreaMethod.BOUNDING_BOX:
        if points is None:
            raise ConfigError("bounding_box area needs the numeric coordinates", key="area_method")
        points = np.asarray(points, dtype=float)
        return float(np.prod(points.max(axis=0) - points.min(axis=0)))
    return float(dm.max()) ** 2


def square_length(dm, config: ThresholdConfig = ThresholdConfig(), points=None) -> float:
    """``sqrt(area / n) * square_lgth_coeff`` for an ``n x n`` distance matrix."""
    dm = check_distance_matrix(dm)
    n = dm.shape[0]
    if n < 2:
        raise SingletonMatrix("square length needs at least two elements")
    return math.sqrt(_area(dm, config.area_method, points) / n) * config.square_lgth_coeff


def closest_counts(dm, radius: float) -> np.ndarray:
    """Neighbours strictly within ``radius``, self excluded, floored at 1."""
    dm = np.asarray(dm)
    within = dm < radius
    np.fill_diagonal(within, False)
    return np.maximum(within.sum(axis=1), 1)


def auto_threshold(dm, config: ThresholdConfig = ThresholdConfig(), points=None,
                   sq_length: float | None = None) -> float:
    """Threshold adapted to the number of points and their local density.

    ``(real_points / n) ** threshold_power`` where each element removes
    ``(closest - 1) / closest`` from ``n`` to form ``real_points``.
    """
    if config.manual_threshold is not None:
        return float(config.manual_threshold)
    dm = check_distance_matrix(dm)
    n = dm.shape[0]
    if n < 2:
        raise SingletonMatrix("thresholds need at least two elements")
    if sq_length is None:
        sq_length = square_length(dm, config, points)
    closest = closest_counts(dm, sq_length * config.closest_coeff)
    inverse = (closest - 1) / closest
    real_points = n - inverse.sum()
    return float((real_points / n) ** config.threshold_power)


@dataclass(frozen=True, eq=False)
class Prenetwork:
    """Weighted directed graph ``weights[x, y] = w(x -> y)`` (0: no edge)."""

    name: str
    weights: np.ndarray
    metric: str | None = None
    scheme: str | None = None
    square_length: float | None = None
    threshold: float | None = None
    features: tuple[str, ...] = ()

    def __post_init__(self):
        dnf.Var(self.name)  # names must be usable inside rules
        w = np.array(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError(f"prenetwork {self.name!r}: weights must be square")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ValueError(f"prenetwork {self.name!r}: weights must be finite and >= 0")
        # self-loops never count towards membership
        np.fill_diagonal(w, 0.0)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    def describe(self) -> dict:
        return {"name": self.name, "features": list(self.features), "metric": self.metric,
                "weight_scheme": self.scheme, "square_length": self.square_length,
                "threshold": self.threshold,
                "n_edges": int(np.count_nonzero(self.weights))}


def radius_weights(dm, radius: float) -> np.ndarray:
    w = (np.asarray(dm) < radius).astype(float)
    np.fill_diagonal(w, 0.0)
    return w


def similarity_weights(dm) -> np.ndarray:
    dm = np.asarray(dm, dtype=float)
    d_max = dm.max() if dm.size else 0.0
    if d_max == 0:
        return np.zeros_like(dm)
    w = 1.0 - dm / d_max
    np.fill_diagonal(w, 0.0)
    return w


def build_prenetwork(group: FeatureGroup, metric="euclidean", config=ThresholdConfig(),
                     scheme="radius", name: str | None = None, dm=None) -> Prenetwork:
    """Distance-derived graph over ``group`` with its automatic threshold."""
    metric = Metric.parse(metric)
    scheme = WeightScheme.parse(scheme)
    if dm is None:
        dm = pairwise_distances(group, metric)
    points = group.values() if config.area_method is AreaMethod.BOUNDING_BOX else None
    if config.area_method is AreaMethod.BOUNDING_BOX and not group.is_numeric:
        raise ConfigError("bounding_box area needs an all-numeric group", key="area_method")
    n = dm.shape[0]
    sq = square_length(dm, config, points) if n >= 2 else 0.0
    if scheme is WeightScheme.RADIUS:
        weights = radius_weights(dm, sq)
    else:
        weights = similarity_weights(dm)
    if config.manual_threshold is not None:
        theta = float(config.manual_threshold)
    elif n >= 2:
        theta = auto_threshold(dm, config, points, sq_length=sq)
    else:
        theta = 1.0
    return Prenetwork(name or "_".join(group.names), weights, metric.value, scheme.value,
                      sq, theta, tuple(group.names))


def as_mask(A, n: int) -> np.ndarray:
    """Boolean membership vector for an iterable of element indices."""
    if isinstance(A, np.ndarray) and A.dtype == bool:
        if A.shape != (n,):
            raise ValueError(f"mask must have shape ({n},)")
        return A
    mask = np.zeros(n, dtype=bool)
    idx = np.fromiter(A, dtype=np.intp)
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        raise IndexError(f"element index out of range for n={n}")
    mask[idx] = True
    return mask


def to_set(mask: np.ndarray) -> frozenset[int]:
    return frozenset(np.flatnonzero(mask).tolist())


def _operator(weights: np.ndarray):
    # radius graphs are sparse; similarity graphs are not
    if np.count_nonzero(weights) <= 0.1 * weights.size:
        return sparse.csr_array(weights)
    return weights


def v_membership(net: Prenetwork, theta: float, A: Iterable[int], x: int) -> bool:
    """Whether the weights of edges from ``x`` into ``A`` (self excluded) reach ``theta``."""
    total = sum(net.weights[x, y] for y in set(A) if y != x)
    return bool(total >= theta)


@dataclass(frozen=True, eq=False)
class PretopologicalSpace:
    prenetworks: tuple[Prenetwork, ...]
    thresholds: tuple[float, ...]
    rule: dnf.Rule
    _operators: tuple = field(init=False, repr=False)

    def __post_init__(self):
        nets = tuple(self.prenetworks)
        thresholds = tuple(float(t) for t in self.thresholds)
        object.__setattr__(self, "prenetworks", nets)
        object.__setattr__(self, "thresholds", thresholds)
        if isinstance(self.rule, str):
            object.__setattr__(self, "rule", dnf.parse_rule(self.rule))
        if not nets:
            raise ConfigError("at least one prenetwork is required", key="prenetworks")
        if len(thresholds) != len(nets):
            raise ConfigError("one threshold per prenetwork is required", key="thresholds")
        if any(not t > 0 for t in thresholds):
            raise ConfigError("thresholds must be strictly positive", key="thresholds")
        names = [p.name for p in nets]
        if len(set(names)) != len(names):
            raise ConfigError("prenetwork names must be unique", key="prenetworks")
        if len({p.n for p in nets}) != 1:
            raise ConfigError("prenetworks must share the same element set", key="prenetworks")
        unknown = dnf.variables(self.rule) - set(names)
        if unknown:
            raise UnknownPrenetworkInRule(unknown)
        object.__setattr__(self, "_operators", tuple(_operator(p.weights) for p in nets))

    @classmethod
    def from_prenetworks(cls, prenetworks: Sequence[Prenetwork], rule) -> "PretopologicalSpace":
        """Use the thresholds stored on each prenetwork."""
        return cls(tuple(prenetworks), tuple(p.threshold for p in prenetworks), rule)

    @property
    def n(self) -> int:
        return self.prenetworks[0].n

    @property
    def names(self) -> list[str]:
        return [p.name for p in self.prenetworks]

    def pseudoclosure_masks(self, masks: np.ndarray) -> np.ndarray:
        """Apply the pseudoclosure to each row of an ``(m, n)`` boolean matrix."""
        masks = np.atleast_2d(np.asarray(masks, dtype=bool))
        indicator_t = masks.T.astype(float)
        tests = {}
        for W, name, theta in zip(self._operators, self.names, self.thresholds):
            # sums[s, x] = total weight of edges x -> A_s
            sums = np.asarray(W @ indicator_t).T
            tests[name] = sums >= theta
        return masks | dnf.evaluate(self.rule, tests)

    def pseudoclosure(self, A: Iterable[int]) -> frozenset[int]:
        mask = as_mask(A, self.n)
        if not mask.any():
            return frozenset()
        return to_set(self.pseudoclosure_masks(mask[None, :])[0])

    def closure_path(self, A: Iterable[int]) -> list[frozenset[int]]:
        """Successive pseudoclosures of ``A`` up to and including the fixpoint."""
        mask = as_mask(A, self.n)
        path = [to_set(mask)]
        if not mask.any():
            return path
        while True:
            grown = self.pseudoclosure_masks(mask[None, :])[0]
            if np.array_equal(grown, mask):
                return path
            mask = grown
            path.append(to_set(mask))

    def closure(self, A: Iterable[int]) -> frozenset[int]:
        return self.closure_path(A)[-1]

    def describe(self) -> dict:
        return {"n": self.n, "rule": dnf.format_rule(self.rule),
                "rule_dnf": dnf.format_dnf(self.rule),
                "prenetworks": [dict(p.describe(), threshold=t)
                                for p, t in zip(self.prenetworks, self.thresholds)]}
