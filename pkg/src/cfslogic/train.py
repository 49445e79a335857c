"""Tiny built-in trainers: minibatch-SGD MLP and a CART forest.

Both are deterministic given their seed.  They exist to produce desk-scale
models with controllable levels of overfit; externally trained models come
in through the model JSON schema instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .models import ForestModel, MlpModel, TreeLeaf, TreeSplit


class TrainingDiverged(Exception):
    pass


@dataclass
class MlpConfig:
    hidden_sizes: tuple[int, ...] = (32, 32)
    epochs: int = 100
    learning_rate: float = 0.1
    batch_size: int = 32
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 0 or self.learning_rate <= 0 or self.batch_size < 1:
            raise ValueError("bad training config")


@dataclass
class ForestConfig:
    num_trees: int = 10
    max_depth: int | None = None
    min_leaf: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.num_trees < 1 or self.min_leaf < 1:
            raise ValueError("bad forest config")


def train_mlp(dataset: Dataset, config: MlpConfig) -> tuple[MlpModel, dict]:
    """Plain minibatch SGD, ReLU hidden layers, softmax cross-entropy,
    inputs scaled to [0, 1].  Returns (model, info) where info reports the
    final float training accuracy."""
    rng = np.random.default_rng(config.seed)
    x_all = dataset.features.astype(np.float64) / 255.0
    y_all = dataset.labels.astype(np.int64)
    n = len(y_all)
    sizes = [dataset.num_features, *config.hidden_sizes, 10]
    weights = [
        rng.normal(0, np.sqrt(2.0 / sizes[i]), size=(sizes[i + 1], sizes[i]))
        for i in range(len(sizes) - 1)
    ]
    biases = [np.zeros(sizes[i + 1]) for i in range(len(sizes) - 1)]
    n_layers = len(weights)
    lr = config.learning_rate

    for _ in range(config.epochs):
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            x, y = x_all[idx], y_all[idx]
            # forward
            acts = [x]
            for li in range(n_layers):
                z = acts[-1] @ weights[li].T + biases[li]
                acts.append(np.maximum(z, 0.0) if li < n_layers - 1 else z)
            logits = acts[-1]
            logits = logits - logits.max(axis=1, keepdims=True)
            ez = np.exp(logits)
            probs = ez / ez.sum(axis=1, keepdims=True)
            if not np.isfinite(probs).all():
                raise TrainingDiverged("non-finite loss")
            # backward
            delta = probs
            delta[np.arange(len(y)), y] -= 1.0
            delta /= len(y)
            for li in range(n_layers - 1, -1, -1):
                gw = delta.T @ acts[li]
                gb = delta.sum(axis=0)
                if li > 0:
                    delta = (delta @ weights[li]) * (acts[li] > 0)
                weights[li] -= lr * gw
                biases[li] -= lr * gb

    model = MlpModel(sizes, weights, biases)
    pred = model.infer_float(dataset.features).argmax(axis=1)
    info = {"train_accuracy": float((pred == y_all).mean())}
    return model, info


def _gini_best_split(x, y, feature_ids, min_leaf):
    """Best (feature, integer threshold, weighted gini) over candidates;
    returns None when no feature splits the node."""
    n = len(y)
    best = None
    counts_total = np.bincount(y, minlength=10).astype(np.float64)
    for f in feature_ids:
        vals = x[:, f]
        order = np.argsort(vals, kind="stable")
        sv = vals[order]
        sy = y[order]
        # candidate boundaries: last index of each distinct value
        change = np.nonzero(sv[:-1] != sv[1:])[0]
        if len(change) == 0:
            continue
        onehot = np.zeros((n, 10))
        onehot[np.arange(n), sy] = 1.0
        cum = onehot.cumsum(axis=0)
        left = cum[change]
        nl = change + 1
        nr = n - nl
        keep = (nl >= min_leaf) & (nr >= min_leaf)
        if not keep.any():
            continue
        right = counts_total[None, :] - left
        gl = 1.0 - (left**2).sum(axis=1) / nl**2
        gr = 1.0 - (right**2).sum(axis=1) / nr**2
        score = (nl * gl + nr * gr) / n
        score[~keep] = np.inf
        i = int(score.argmin())
        if best is None or score[i] < best[2] - 1e-12:
            best = (f, int(sv[change[i]]), float(score[i]))
    return best


def _grow_tree(x, y, rng, config, depth):
    counts = np.bincount(y, minlength=10)
    pure = (counts > 0).sum() <= 1
    if (
        pure
        or len(y) < 2 * config.min_leaf
        or (config.max_depth is not None and depth >= config.max_depth)
    ):
        return TreeLeaf([int(c) for c in counts])
    k = max(1, int(np.sqrt(x.shape[1])))
    feature_ids = np.sort(rng.choice(x.shape[1], size=k, replace=False))
    best = _gini_best_split(x, y, feature_ids, config.min_leaf)
    if best is None:
        # fall back to searching every feature before declaring a leaf
        best = _gini_best_split(x, y, np.arange(x.shape[1]), config.min_leaf)
    if best is None:
        return TreeLeaf([int(c) for c in counts])
    f, t, _ = best
    go_left = x[:, f] <= t
    return TreeSplit(
        f, t,
        _grow_tree(x[go_left], y[go_left], rng, config, depth + 1),
        _grow_tree(x[~go_left], y[~go_left], rng, config, depth + 1),
    )


def train_forest(dataset: Dataset, config: ForestConfig) -> ForestModel:
    """CART with gini impurity, integer thresholds (left iff byte <= t),
    sqrt-feature subsampling per split, no bootstrapping, unweighted
    count-sum leaves."""
    x = dataset.features.astype(np.int64)
    y = dataset.labels.astype(np.int64)
    trees = []
    for t in range(config.num_trees):
        rng = np.random.default_rng([config.seed, t])
        trees.append(_grow_tree(x, y, rng, config, 0))
    return ForestModel(trees)


def tree_node_count(node) -> int:
    if isinstance(node, TreeLeaf):
        return 1
    return 1 + tree_node_count(node.left) + tree_node_count(node.right)


def forest_node_count(f: ForestModel) -> int:
    return sum(tree_node_count(t) for t in f.trees)
