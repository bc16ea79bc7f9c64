"""Data generation, ingestion and batching.

Synthetic Gaussian-cluster tasks, evaluation grids for uncertainty
landscapes, big-endian IDX image files (gzip optional), numeric CSV with a
header row, and the epoch-permuted dataloader.  Datasets are immutable after
construction; labels are always full soft-label vectors on the simplex.
"""

from __future__ import annotations

import csv
import gzip
import struct
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801

SYNTHETIC_CLUSTER_SIZES = (20, 50, 100, 200, 500)


class DataError(ValueError):
    """Malformed or inconsistent data file."""


@dataclass(frozen=True)
class LabeledExample:
    """A feature tensor plus a soft label (probability vector over classes)."""

    x: np.ndarray
    y: np.ndarray


@dataclass
class Dataset:
    """Uniformly shaped features (n, *shape) with soft labels (n, K)."""

    features: np.ndarray
    labels: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.float64)
        if len(self.features) != len(self.labels):
            raise DataError(f"{len(self.features)} feature rows vs {len(self.labels)} labels")
        if self.labels.ndim != 2 or self.labels.shape[1] < 2:
            raise DataError("labels must be (n, K) with K >= 2")
        if not np.isfinite(self.features).all() or not np.isfinite(self.labels).all():
            raise DataError("non-finite values in dataset")
        if self.labels.min() < -1e-9:
            raise DataError("soft labels must be nonnegative")
        if np.abs(self.labels.sum(axis=1) - 1.0).max() > 1e-9:
            raise DataError("soft labels must sum to one")

    def __len__(self) -> int:
        return len(self.features)

    def __getitem__(self, i: int) -> LabeledExample:
        return LabeledExample(self.features[i], self.labels[i])

    def __iter__(self) -> Iterator[LabeledExample]:
        for i in range(len(self)):
            yield self[i]

    @property
    def num_classes(self) -> int:
        return self.labels.shape[1]

    @property
    def feature_shape(self) -> tuple[int, ...]:
        return self.features.shape[1:]

    @property
    def class_indices(self) -> np.ndarray:
        """Hard labels: argmax of the soft labels (lowest index on ties)."""
        return self.labels.argmax(axis=1)

    @staticmethod
    def from_examples(examples: Sequence[LabeledExample], meta: dict | None = None) -> "Dataset":
        if len(examples) == 0:
            raise DataError("empty example list")
        return Dataset(np.stack([e.x for e in examples]),
                       np.stack([e.y for e in examples]),
                       meta or {})


def one_hot(indices: np.ndarray, num_classes: int) -> np.ndarray:
    out = np.zeros((len(indices), num_classes))
    out[np.arange(len(indices)), indices] = 1.0
    return out


# ---------------------------------------------------------------------------
# synthetic clusters


def _cluster_layout(seed: int):
    rng = np.random.default_rng(seed)
    centers = rng.uniform(-10.0, 10.0, (len(SYNTHETIC_CLUSTER_SIZES), 2))
    return rng, centers


def gen_synthetic_clusters(seed: int) -> Dataset:
    """Five 2D Gaussian clusters of sizes 20/50/100/200/500, one class each.

    Cluster centers are uniform in [-10, 10]^2 with unit-diagonal covariance;
    both are recorded in the dataset meta for reproducibility.
    """
    rng, centers = _cluster_layout(seed)
    xs, ys = [], []
    for k, size in enumerate(SYNTHETIC_CLUSTER_SIZES):
        xs.append(centers[k] + rng.standard_normal((size, 2)))
        ys.append(np.full(size, k))
    features = np.concatenate(xs)
    labels = one_hot(np.concatenate(ys).astype(int), len(SYNTHETIC_CLUSTER_SIZES))
    meta = {
        "source": "synthetic-clusters",
        "seed": int(seed),
        "sizes": list(SYNTHETIC_CLUSTER_SIZES),
        "centers": centers.tolist(),
        "covariance": "identity",
    }
    return Dataset(features, labels, meta)


# ---------------------------------------------------------------------------
# evaluation grid


@dataclass(frozen=True)
class EvalGrid:
    """Evenly spaced lattice over a padded bounding box, row-major points."""

    lower: np.ndarray
    upper: np.ndarray
    resolution: tuple[int, ...]
    points: np.ndarray

    def __len__(self):
        return len(self.points)


def make_grid(dataset: Dataset, padding: float, resolution: int) -> EvalGrid:
    """Lattice over the data bounding box expanded by ``padding`` per side."""
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    feats = dataset.features.reshape(len(dataset), -1)
    lower = feats.min(axis=0) - padding
    upper = feats.max(axis=0) + padding
    axes = [np.linspace(lo, hi, resolution) for lo, hi in zip(lower, upper)]
    mesh = np.meshgrid(*axes, indexing="ij")
    points = np.stack([m.ravel() for m in mesh], axis=-1)
    return EvalGrid(lower, upper, (resolution,) * len(axes), points)


# ---------------------------------------------------------------------------
# IDX image files (big endian, optionally gzipped)


def _open_maybe_gzip(path, mode="rb"):
    if str(path).endswith(".gz"):
        return gzip.open(path, mode)
    return open(path, mode)


def _read_exact(f, n: int, path) -> bytes:
    data = f.read(n)
    if len(data) != n:
        raise DataError(f"truncated IDX file {path}: wanted {n} bytes, got {len(data)}")
    return data


def load_idx(images_path, labels_path, standardize: bool = False) -> Dataset:
    """Images plus labels from the big-endian IDX pair used for digit datasets.

    Pixels are scaled to [0, 1]; with ``standardize`` they are additionally
    centered/scaled by the dataset mean and std (recorded in the meta).
    """
    with _open_maybe_gzip(images_path) as f:
        (magic,) = struct.unpack(">I", _read_exact(f, 4, images_path))
        if magic != IDX_IMAGES_MAGIC:
            raise DataError(f"bad image magic 0x{magic:08x} in {images_path}")
        count, rows, cols = struct.unpack(">III", _read_exact(f, 12, images_path))
        raw = _read_exact(f, count * rows * cols, images_path)
        images = np.frombuffer(raw, dtype=np.uint8).reshape(count, 1, rows, cols)
    with _open_maybe_gzip(labels_path) as f:
        (magic,) = struct.unpack(">I", _read_exact(f, 4, labels_path))
        if magic != IDX_LABELS_MAGIC:
            raise DataError(f"bad label magic 0x{magic:08x} in {labels_path}")
        (lcount,) = struct.unpack(">I", _read_exact(f, 4, labels_path))
        raw = _read_exact(f, lcount, labels_path)
        label_idx = np.frombuffer(raw, dtype=np.uint8)
    if count != lcount:
        raise DataError(f"image/label count mismatch: {count} images vs {lcount} labels")
    features = images.astype(np.float64) / 255.0
    meta = {"source": str(images_path), "scale": "pixels/255"}
    if standardize:
        mean = float(features.mean())
        std = float(features.std())
        features = (features - mean) / std
        meta.update(standardize_mean=mean, standardize_std=std)
    k = max(int(label_idx.max()) + 1, 2)
    return Dataset(features, one_hot(label_idx.astype(int), k), meta)


def save_idx(images: np.ndarray, labels: np.ndarray, images_path, labels_path) -> None:
    """Write a uint8 image stack (n, rows, cols) and labels (n,) as an IDX pair."""
    images = np.asarray(images, dtype=np.uint8)
    labels = np.asarray(labels, dtype=np.uint8)
    n, rows, cols = images.shape
    with _open_maybe_gzip(images_path, "wb") as f:
        f.write(struct.pack(">IIII", IDX_IMAGES_MAGIC, n, rows, cols))
        f.write(images.tobytes())
    with _open_maybe_gzip(labels_path, "wb") as f:
        f.write(struct.pack(">II", IDX_LABELS_MAGIC, len(labels)))
        f.write(labels.tobytes())


# ---------------------------------------------------------------------------
# numeric CSV with header


def load_csv(path, label_column: str) -> Dataset:
    """Rectangular numeric CSV; the named column holds class labels.

    Classes are the sorted distinct label values mapped to indices 0..K-1.
    """
    with open(path, newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if label_column not in header:
            raise DataError(f"{path}: label column {label_column!r} not in header {header}")
        label_pos = header.index(label_column)
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise DataError(f"{path}:{lineno}: expected {len(header)} cells, got {len(row)}")
            try:
                rows.append([float(c) for c in row])
            except ValueError as e:
                raise DataError(f"{path}:{lineno}: non-numeric cell ({e})") from None
    if not rows:
        raise DataError(f"{path}: no data rows")
    table = np.asarray(rows)
    label_vals = table[:, label_pos]
    features = np.delete(table, label_pos, axis=1)
    classes = np.unique(label_vals)
    if len(classes) < 2:
        raise DataError(f"{path}: need at least two distinct label values")
    idx = np.searchsorted(classes, label_vals)
    meta = {"source": str(path), "label_column": label_column, "classes": classes.tolist()}
    return Dataset(features, one_hot(idx, len(classes)), meta)


def save_csv(dataset: Dataset, path, label_column: str = "label") -> None:
    """Feature columns x1..xd plus a class-index label column; exact round-trip."""
    feats = dataset.features.reshape(len(dataset), -1)
    hard = dataset.class_indices
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow([f"x{i + 1}" for i in range(feats.shape[1])] + [label_column])
        for row, lab in zip(feats, hard):
            writer.writerow([repr(float(v)) for v in row] + [int(lab)])


# ---------------------------------------------------------------------------
# dataloader


def epoch_permutation_batches(n: int, n_mb: int, rng: np.random.Generator) -> list[np.ndarray]:
    """One fresh permutation of 0..n-1 chopped into contiguous chunks.

    The final short chunk is kept, so the batches partition the index set.
    """
    if n_mb < 1:
        raise ValueError("minibatch size must be >= 1")
    perm = rng.permutation(n)
    return [perm[i:i + n_mb] for i in range(0, n, n_mb)]


def dataloader(dataset: Dataset, n_mb: int, epoch_seed: int) -> list[np.ndarray]:
    """Minibatch index arrays for one epoch, deterministic in ``epoch_seed``."""
    return epoch_permutation_batches(len(dataset), n_mb, np.random.default_rng(epoch_seed))
