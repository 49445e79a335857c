"""Datasets: IDX ingestion, the bundled 8x8 digit set, synthetic
generators, and seeded label corruption."""

from __future__ import annotations

import importlib.resources
import struct
from dataclasses import dataclass, field

import numpy as np

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


@dataclass
class Dataset:
    features: np.ndarray  # (N, F) uint8
    labels: np.ndarray  # (N,) uint8, classes 0..9
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.uint8)
        self.labels = np.asarray(self.labels, dtype=np.uint8)
        if self.features.ndim != 2 or len(self.features) != len(self.labels):
            raise ValueError("features/labels shape mismatch")
        if len(self.labels) < 1:
            raise ValueError("empty dataset")
        if self.labels.max() > 9:
            raise ValueError("labels must be in 0..9")

    @property
    def num_examples(self):
        return len(self.labels)

    @property
    def num_features(self):
        return self.features.shape[1]

    def subset(self, count: int) -> "Dataset":
        prov = dict(self.provenance, subset=count)
        return Dataset(self.features[:count], self.labels[:count], prov)


class IdxError(Exception):
    pass


def _read_exact(f, n, what):
    buf = f.read(n)
    if len(buf) != n:
        raise IdxError(f"truncated file while reading {what}")
    return buf


def read_idx(images_path, labels_path) -> Dataset:
    """Read an MNIST-style IDX image/label file pair (big-endian)."""
    with open(images_path, "rb") as f:
        magic, n, rows, cols = struct.unpack(">IIII", _read_exact(f, 16, "image header"))
        if magic != IDX_IMAGES_MAGIC:
            raise IdxError(f"bad image magic 0x{magic:08x}")
        data = _read_exact(f, n * rows * cols, "image data")
        features = np.frombuffer(data, dtype=np.uint8).reshape(n, rows * cols)
    with open(labels_path, "rb") as f:
        magic, nl = struct.unpack(">II", _read_exact(f, 8, "label header"))
        if magic != IDX_LABELS_MAGIC:
            raise IdxError(f"bad label magic 0x{magic:08x}")
        labels = np.frombuffer(_read_exact(f, nl, "label data"), dtype=np.uint8)
    if n != nl:
        raise IdxError(f"image/label count mismatch: {n} vs {nl}")
    return Dataset(
        features, labels,
        {"source": f"idx:{images_path}", "shape": f"{rows}x{cols}"},
    )


def write_idx(dataset: Dataset, images_path, labels_path, rows: int | None = None):
    n, feat = dataset.features.shape
    if rows is None:
        rows = int(np.sqrt(feat))
        if rows * rows != feat:
            rows = 1
    cols = feat // rows
    if rows * cols != feat:
        raise IdxError(f"{feat} features do not factor as {rows} rows")
    with open(images_path, "wb") as f:
        f.write(struct.pack(">IIII", IDX_IMAGES_MAGIC, n, rows, cols))
        f.write(dataset.features.tobytes())
    with open(labels_path, "wb") as f:
        f.write(struct.pack(">II", IDX_LABELS_MAGIC, n))
        f.write(dataset.labels.tobytes())


def digits(count: int | None = None) -> Dataset:
    """The bundled 8x8 digit set (1797 examples, bytes 0..255)."""
    ref = importlib.resources.files("cfslogic").joinpath("data/digits8x8.npz")
    with ref.open("rb") as f:
        npz = np.load(f)
        ds = Dataset(npz["features"], npz["labels"], {"source": "digits8x8"})
    return ds.subset(count) if count is not None else ds


def synth_blobs(n: int, num_classes: int = 2, num_features: int = 16,
                seed: int = 0, spread: float = 18.0) -> Dataset:
    """Gaussian blobs on byte features, one well-separated center per
    class; linearly separable for small spread."""
    rng = np.random.default_rng(seed)
    centers = rng.uniform(40, 215, size=(num_classes, num_features))
    labels = rng.integers(0, num_classes, size=n)
    pts = centers[labels] + rng.normal(0, spread, size=(n, num_features))
    features = np.clip(np.round(pts), 0, 255).astype(np.uint8)
    return Dataset(
        features, labels.astype(np.uint8),
        {"source": f"synth_blobs(n={n},classes={num_classes},seed={seed})"},
    )


def corrupt_labels(dataset: Dataset, mode: str, seed: int,
                   fraction: float | None = None) -> Dataset:
    """Seeded label corruption: ``shuffle`` permutes the whole label
    column; ``resample`` redraws a fraction of labels uniformly 0..9."""
    rng = np.random.default_rng(seed)
    labels = dataset.labels.copy()
    if mode == "shuffle":
        labels = labels[rng.permutation(len(labels))]
        desc = {"corruption": "shuffle", "seed": seed}
    elif mode == "resample":
        if fraction is None or not 0.0 <= fraction <= 1.0:
            raise ValueError("resample needs fraction in [0, 1]")
        k = int(round(fraction * len(labels)))
        idx = rng.choice(len(labels), size=k, replace=False)
        labels[idx] = rng.integers(0, 10, size=k, dtype=np.uint8)
        desc = {"corruption": f"resample({fraction})", "seed": seed}
    else:
        raise ValueError(f"unknown corruption mode {mode!r}")
    return Dataset(dataset.features, labels, dict(dataset.provenance, **desc))
