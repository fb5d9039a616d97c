"""Shared builders for small hand-made spaces and tables."""
import numpy as np

from pretopomd.data import Feature, FeatureKind, MixedDataTable, Schema
from pretopomd.dnf import And, Or, Var
from pretopomd.space import Prenetwork, PretopologicalSpace


def numeric_table(values, name="x"):
    X = np.asarray(values, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    names = [name] if X.shape[1] == 1 else [f"{name}{j}" for j in range(X.shape[1])]
    return MixedDataTable.from_array(X, names)


def mixed_table(numeric, categorical, levels=("a", "b", "c")):
    feats = (Feature("x", FeatureKind.NUMERIC), Feature("c", FeatureKind.CATEGORICAL, tuple(levels)))
    return MixedDataTable(Schema(feats), list(zip(map(float, numeric), categorical)))


def chain_space(n=3):
    """Path graph 0 - 1 - ... - n-1 with unit weights and threshold 1."""
    W = np.zeros((n, n))
    for i in range(n - 1):
        W[i, i + 1] = W[i + 1, i] = 1.0
    return PretopologicalSpace((Prenetwork("N", W),), (1.0,), Var("N"))


def random_rule(rng, names, depth=0):
    """Random positive rule tree over ``names``."""
    if depth >= 3 or len(names) == 1 or rng.random() < 0.35:
        return Var(str(rng.choice(names)))
    k = int(rng.integers(2, 4))
    children = [random_rule(rng, names, depth + 1) for _ in range(k)]
    return (And if rng.random() < 0.5 else Or)(*children)


def random_space(rng, n=None, n_nets=None):
    n = int(rng.integers(1, 41)) if n is None else n
    n_nets = int(rng.integers(1, 5)) if n_nets is None else n_nets
    nets, thetas = [], []
    for k in range(n_nets):
        density = rng.uniform(0.05, 0.5)
        W = (rng.random((n, n)) < density) * rng.choice([1.0, 0.5, 2.0], size=(n, n))
        nets.append(Prenetwork(f"P{k}", W))
        thetas.append(float(rng.choice([0.5, 1.0, 1.5, 2.0, 3.0])))
    rule = random_rule(rng, [p.name for p in nets])
    return PretopologicalSpace(tuple(nets), tuple(thetas), rule)
