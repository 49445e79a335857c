"""Decision forest export for fitted scikit-learn classifiers."""

from __future__ import annotations

import numpy as np

from .report import ExportReport

NUM_CLASSES = 10
COUNT_MAX = 65535


def export_forest(fitted) -> tuple[dict, ExportReport]:
    """Convert a fitted sklearn forest (or single tree) classifier to the
    shared model JSON.

    Split thresholds are floored to integers, which preserves every
    comparison outcome on integer-valued features (x <= t iff
    x <= floor(t)).  Leaf class counts are recovered from the tree arrays;
    forests fitted with sample weights do not carry plain counts and are
    rejected.
    """
    import sklearn

    estimators = getattr(fitted, "estimators_", None)
    if estimators is None:
        if not hasattr(fitted, "tree_"):
            raise TypeError(f"not a fitted sklearn forest: {type(fitted).__name__}")
        estimators = [fitted]
    if getattr(fitted, "bootstrap", False):
        raise ValueError("bootstrap resampling loses the training-set counts; "
                         "fit with bootstrap=False")

    classes = np.asarray(fitted.classes_)
    if not np.issubdtype(classes.dtype, np.integer):
        raise ValueError("class labels must be integers")
    if classes.min() < 0 or classes.max() >= NUM_CLASSES:
        raise ValueError(f"class labels must lie in 0..{NUM_CLASSES - 1}")
    class_index = {int(c): k for k, c in enumerate(classes)}

    trees = []
    total_nodes = 0
    max_depth = 0
    for est in estimators:
        t = est.tree_
        if not np.array_equal(t.weighted_n_node_samples, t.n_node_samples):
            raise ValueError("weighted trees are not supported")
        counts = t.value[:, 0, :] * t.n_node_samples[:, None]
        if not np.allclose(counts, np.round(counts), atol=1e-6):
            raise ValueError("weighted trees are not supported")
        counts = np.round(counts).astype(np.int64)
        trees.append(_node_to_json(t, 0, counts, class_index))
        total_nodes += int(t.node_count)
        max_depth = max(max_depth, int(t.max_depth))

    obj = {"kind": "forest", "trees": trees}
    report = ExportReport(
        framework="sklearn",
        framework_version=sklearn.__version__,
        shape=f"forest {len(trees)} trees, {total_nodes} nodes, depth {max_depth}",
    )
    return obj, report


def _node_to_json(t, node: int, counts: np.ndarray, class_index: dict) -> dict:
    left, right = int(t.children_left[node]), int(t.children_right[node])
    if left < 0:  # leaf
        row = [0] * NUM_CLASSES
        for label, k in class_index.items():
            row[label] = int(counts[node, k])
        if max(row) > COUNT_MAX:
            raise ValueError(f"leaf count {max(row)} exceeds {COUNT_MAX}")
        return {"counts": row}
    threshold = int(np.floor(t.threshold[node]))
    if not 0 <= threshold <= 255:
        raise ValueError(f"split threshold {threshold} outside byte range")
    return {
        "feature": int(t.feature[node]),
        "threshold": threshold,
        "left": _node_to_json(t, left, counts, class_index),
        "right": _node_to_json(t, right, counts, class_index),
    }
