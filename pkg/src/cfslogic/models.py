"""Model descriptions, quantization, JSON interchange, and the bit-exact
scalar reference evaluators used as compiler oracles."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .wordarith import fx_add_sat, fx_mul_const_csd, fx_rescale_24_to_16

# activation code for a raw pixel byte: round(64 * p / 255), i.e. the
# [0,1]-normalized pixel in A16F6
PIXEL_TO_A16 = np.round(64 * np.arange(256) / 255).astype(np.int64)

WEIGHT_MAX_FLOAT = 127 / 64  # [-2.0, 2.0) clamp, inclusive of max code
BIAS_MIN_FLOAT = -(2.0**11)
BIAS_MAX_FLOAT = (2**23 - 1) / 2**12


@dataclass
class MlpModel:
    """Dense ReLU network, raw (pre-softmax) outputs."""

    layer_sizes: list[int]
    weights: list[np.ndarray]  # per layer, (out, in)
    biases: list[np.ndarray]

    def __post_init__(self):
        self.weights = [np.asarray(w, dtype=np.float64) for w in self.weights]
        self.biases = [np.asarray(b, dtype=np.float64) for b in self.biases]
        sizes = self.layer_sizes
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.shape != (sizes[i + 1], sizes[i]) or b.shape != (sizes[i + 1],):
                raise ValueError(f"layer {i} shape mismatch")

    def infer_float(self, pixel_bytes: np.ndarray) -> np.ndarray:
        """Float inference with the same input normalization the circuits
        use (pixels scaled to [0, 1])."""
        x = np.asarray(pixel_bytes, dtype=np.float64) / 255.0
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            x = x @ w.T + b
            if i < len(self.weights) - 1:
                x = np.maximum(x, 0.0)
        return x


@dataclass
class QuantizedMlp:
    weights: list[np.ndarray]  # W8F6 codes
    biases: list[np.ndarray]  # ACC24F12 codes

    @property
    def layer_sizes(self):
        return [self.weights[0].shape[1]] + [w.shape[0] for w in self.weights]


def rescale_mlp_weights(m: MlpModel, limit: float = WEIGHT_MAX_FLOAT) -> MlpModel:
    """Scale each layer so weights fit inside the quantizer's clamp range.

    ReLU layers are positively homogeneous, so scaling a layer's weights and
    compensating in the cumulative bias scale leaves the argmax unchanged
    (logits end up multiplied by one positive constant).  Apply this before
    :func:`quantize_mlp` to models whose weights outgrew [-2, 2).
    """
    ws, bs, k = [], [], 1.0
    for w, b in zip(m.weights, m.biases):
        mx = float(np.abs(w).max()) if w.size else 0.0
        s = min(1.0, limit / mx) if mx > 0 else 1.0
        k *= s
        ws.append(w * s)
        bs.append(b * k)
    return MlpModel(m.layer_sizes, ws, bs)


def quantize_mlp(m: MlpModel) -> QuantizedMlp:
    """Weights clamped to [-2.0, 2.0) then rounded (half to even) to W8F6;
    biases clamped and rounded to accumulator precision."""
    ws, bs = [], []
    for w, b in zip(m.weights, m.biases):
        if not np.isfinite(w).all() or not np.isfinite(b).all():
            raise ValueError("non-finite weight or bias")
        ws.append(np.round(np.clip(w, -2.0, WEIGHT_MAX_FLOAT) * 64).astype(np.int64))
        bs.append(
            np.round(np.clip(b, BIAS_MIN_FLOAT, BIAS_MAX_FLOAT) * 4096).astype(np.int64)
        )
    return QuantizedMlp(ws, bs)


def reference_eval_quantized_mlp(q: QuantizedMlp, pixel_bytes) -> list[int]:
    """Scalar mirror of the compiled MLP semantics: bias-initialized 24-bit
    saturating accumulation in input order, zero weights skipped,
    truncate-and-saturate rescale, ReLU on hidden layers."""
    acts = [int(PIXEL_TO_A16[p]) for p in np.asarray(pixel_bytes, dtype=np.uint8)]
    n_layers = len(q.weights)
    for li in range(n_layers):
        w, b = q.weights[li], q.biases[li]
        nxt = []
        for i in range(w.shape[0]):
            acc = int(b[i])
            for j in range(w.shape[1]):
                code = int(w[i, j])
                if code:
                    acc = fx_add_sat(acc, fx_mul_const_csd(acts[j], code))
            v = fx_rescale_24_to_16(acc)
            if li < n_layers - 1:
                v = max(0, v)
            nxt.append(v)
        acts = nxt
    return acts


@dataclass
class TreeSplit:
    feature: int
    threshold: int  # go left iff feature byte <= threshold
    left: "TreeSplit | TreeLeaf"
    right: "TreeSplit | TreeLeaf"


@dataclass
class TreeLeaf:
    counts: list[int]  # per-class example counts, 10 entries

    def __post_init__(self):
        if len(self.counts) != 10:
            raise ValueError("leaf needs 10 class counts")
        if any(c < 0 or c > 65535 for c in self.counts):
            raise ValueError("class count out of 16-bit range")


@dataclass
class ForestModel:
    trees: list  # TreeSplit | TreeLeaf roots


def _eval_tree(node, x) -> list[int]:
    while isinstance(node, TreeSplit):
        node = node.left if int(x[node.feature]) <= node.threshold else node.right
    return node.counts


def reference_eval_forest(f: ForestModel, pixel_bytes) -> list[int]:
    """Per-class totals with the compiled circuit's unsigned 16-bit
    saturating tree-sum."""
    x = np.asarray(pixel_bytes, dtype=np.uint8)
    totals = [0] * 10
    for t in f.trees:
        counts = _eval_tree(t, x)
        totals = [min(a + c, 65535) for a, c in zip(totals, counts)]
    return totals


@dataclass
class LutModel:
    """Ordered lookup table; first matching entry wins, class 0 otherwise."""

    entries: list[tuple[np.ndarray, int]]
    default_class: int = 0

    def __post_init__(self):
        self.entries = [
            (np.asarray(x, dtype=np.uint8), int(y)) for x, y in self.entries
        ]

    def eval(self, pixel_bytes) -> int:
        x = np.asarray(pixel_bytes, dtype=np.uint8)
        for xe, ye in self.entries:
            if np.array_equal(x, xe):
                return ye
        return self.default_class


# -- JSON interchange ----------------------------------------------------


def _tree_to_json(node):
    if isinstance(node, TreeLeaf):
        return {"counts": [int(c) for c in node.counts]}
    return {
        "feature": int(node.feature),
        "threshold": int(node.threshold),
        "left": _tree_to_json(node.left),
        "right": _tree_to_json(node.right),
    }


def _tree_from_json(obj):
    if "counts" in obj:
        return TreeLeaf([int(c) for c in obj["counts"]])
    return TreeSplit(
        int(obj["feature"]),
        int(obj["threshold"]),
        _tree_from_json(obj["left"]),
        _tree_from_json(obj["right"]),
    )


def model_to_json(model) -> dict:
    if isinstance(model, MlpModel):
        return {
            "kind": "mlp",
            "layer_sizes": [int(s) for s in model.layer_sizes],
            "weights": [w.tolist() for w in model.weights],
            "biases": [b.tolist() for b in model.biases],
        }
    if isinstance(model, ForestModel):
        return {"kind": "forest", "trees": [_tree_to_json(t) for t in model.trees]}
    if isinstance(model, LutModel):
        return {
            "kind": "lut",
            "entries": [[x.tolist(), int(y)] for x, y in model.entries],
            "default_class": model.default_class,
        }
    raise TypeError(f"not a model: {model!r}")


def model_from_json(obj: dict):
    kind = obj.get("kind")
    if kind == "mlp":
        return MlpModel(obj["layer_sizes"], obj["weights"], obj["biases"])
    if kind == "forest":
        return ForestModel([_tree_from_json(t) for t in obj["trees"]])
    if kind == "lut":
        return LutModel(
            [(x, y) for x, y in obj["entries"]], obj.get("default_class", 0)
        )
    raise ValueError(f"unknown model kind {kind!r}")


def save_model(model, path):
    with open(path, "w") as f:
        json.dump(model_to_json(model), f)
        f.write("\n")


def load_model(path):
    with open(path) as f:
        return model_from_json(json.load(f))
