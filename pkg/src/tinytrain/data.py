"""Dataset loading, normalization, splitting, and batching.

Loaders parse the two on-disk formats byte-for-byte: the big-endian IDX
format used by the MNIST distribution and the CIFAR-10 binary batches
(3073-byte records: one label byte then 3072 channel-plane bytes).
Gzip-compressed files are accepted transparently. Loaders return raw pixel
values in [0, 255]; normalize() is a separate, explicit step.
"""

from __future__ import annotations

import gzip
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, ContractError, FormatError, ShapeError

IDX_IMAGES_MAGIC = 2051
IDX_LABELS_MAGIC = 2049
CIFAR_RECORD = 3073

MNIST_FILES = {
    "train": ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
    "test": ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
}
CIFAR_TRAIN_FILES = tuple(f"data_batch_{i}.bin" for i in range(1, 6))
CIFAR_TEST_FILES = ("test_batch.bin",)


@dataclass
class Dataset:
    """Images as (N, C, H, W) float64 with integer labels (N,)."""

    name: str
    images: np.ndarray
    labels: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        self.images = np.asarray(self.images, dtype=np.float64)
        self.labels = np.asarray(self.labels)
        if self.images.ndim != 4:
            raise ShapeError(f"images must be (N,C,H,W), got {self.images.shape}")
        if self.labels.ndim != 1 or not np.issubdtype(self.labels.dtype, np.integer):
            raise ShapeError(
                f"labels must be 1-D integers, got {self.labels.dtype} "
                f"shape {self.labels.shape}"
            )
        if self.images.shape[0] != self.labels.shape[0]:
            raise ShapeError(
                f"{self.images.shape[0]} images but {self.labels.shape[0]} labels"
            )

    def __len__(self):
        return int(self.images.shape[0])


def _read_bytes(path):
    raw = Path(path).read_bytes()
    if raw[:2] == b"\x1f\x8b":
        raw = gzip.decompress(raw)
    return raw


def load_idx_images(path):
    """Raw pixel array (N, rows, cols) from an IDX3 unsigned-byte file."""
    raw = _read_bytes(path)
    if len(raw) < 16:
        raise FormatError(f"{path}: IDX image header truncated")
    magic, n, rows, cols = struct.unpack(">iiii", raw[:16])
    if magic != IDX_IMAGES_MAGIC:
        raise FormatError(
            f"{path}: bad IDX image magic {magic}, expected {IDX_IMAGES_MAGIC}"
        )
    want = 16 + n * rows * cols
    if len(raw) != want:
        raise FormatError(f"{path}: expected {want} bytes, found {len(raw)}")
    return np.frombuffer(raw, dtype=np.uint8, offset=16).reshape(n, rows, cols)


def load_idx_labels(path):
    """Label vector (N,) from an IDX1 unsigned-byte file."""
    raw = _read_bytes(path)
    if len(raw) < 8:
        raise FormatError(f"{path}: IDX label header truncated")
    magic, n = struct.unpack(">ii", raw[:8])
    if magic != IDX_LABELS_MAGIC:
        raise FormatError(
            f"{path}: bad IDX label magic {magic}, expected {IDX_LABELS_MAGIC}"
        )
    if len(raw) != 8 + n:
        raise FormatError(f"{path}: expected {8 + n} bytes, found {len(raw)}")
    return np.frombuffer(raw, dtype=np.uint8, offset=8)


def load_mnist_idx(images_path, labels_path, name="mnist"):
    """Pair an IDX image file with its label file into a Dataset.

    Pixel values are kept as written (0..255); images gain a singleton
    channel axis.
    """
    images = load_idx_images(images_path)
    labels = load_idx_labels(labels_path)
    if images.shape[0] != labels.shape[0]:
        raise FormatError(
            f"{images.shape[0]} images in {images_path} but "
            f"{labels.shape[0]} labels in {labels_path}"
        )
    return Dataset(
        name,
        images[:, None, :, :].astype(np.float64),
        labels.astype(np.int64),
    )


def _resolve(directory, filename):
    base = Path(directory) / filename
    for candidate in (base, base.with_name(base.name + ".gz")):
        if candidate.exists():
            return candidate
    raise FileNotFoundError(f"{base} (or {base.name}.gz) not found")


def load_mnist(data_dir, split="train"):
    """Load an official MNIST split from a directory of IDX files."""
    if split not in MNIST_FILES:
        raise ConfigError(f"split must be 'train' or 'test', got {split!r}")
    images_name, labels_name = MNIST_FILES[split]
    return load_mnist_idx(
        _resolve(data_dir, images_name),
        _resolve(data_dir, labels_name),
        name=f"mnist-{split}",
    )


def load_cifar10_file(path):
    """One CIFAR-10 binary batch: (images (N,3,32,32), labels (N,))."""
    raw = _read_bytes(path)
    if len(raw) == 0 or len(raw) % CIFAR_RECORD:
        raise FormatError(
            f"{path}: size {len(raw)} is not a multiple of {CIFAR_RECORD}"
        )
    records = np.frombuffer(raw, dtype=np.uint8).reshape(-1, CIFAR_RECORD)
    labels = records[:, 0]
    if labels.max(initial=0) > 9:
        raise FormatError(f"{path}: label {labels.max()} out of range 0..9")
    images = records[:, 1:].reshape(-1, 3, 32, 32)
    return images, labels


def load_cifar10(data_dir, split="train"):
    """Load a CIFAR-10 split from the binary-batches directory.

    Accepts either the directory holding the .bin files or its parent
    containing the conventional cifar-10-batches-bin subdirectory.
    """
    if split == "train":
        names = CIFAR_TRAIN_FILES
    elif split == "test":
        names = CIFAR_TEST_FILES
    else:
        raise ConfigError(f"split must be 'train' or 'test', got {split!r}")
    root = Path(data_dir)
    if not (root / names[0]).exists() and not (root / (names[0] + ".gz")).exists():
        nested = root / "cifar-10-batches-bin"
        if nested.is_dir():
            root = nested
    parts = [load_cifar10_file(_resolve(root, n)) for n in names]
    images = np.concatenate([p[0] for p in parts])
    labels = np.concatenate([p[1] for p in parts])
    return Dataset(
        f"cifar10-{split}",
        images.astype(np.float64),
        labels.astype(np.int64),
    )


def _as_uint8(values, what):
    arr = np.asarray(values)
    if arr.dtype != np.uint8:
        rounded = np.rint(arr)
        if not np.array_equal(rounded, arr) or arr.min(initial=0) < 0 \
                or arr.max(initial=0) > 255:
            raise ShapeError(f"{what} must be integers in 0..255 to serialise")
        arr = rounded.astype(np.uint8)
    return arr


def write_mnist_idx(images, labels, images_path, labels_path):
    """Write an image/label pair in IDX format (for fixtures and tests).

    images may be (N, rows, cols) or (N, 1, rows, cols) with integer values
    in 0..255.
    """
    arr = _as_uint8(images, "images")
    if arr.ndim == 4 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 3:
        raise ShapeError(f"images must be (N,rows,cols), got {np.shape(images)}")
    lab = _as_uint8(labels, "labels")
    if lab.ndim != 1 or lab.shape[0] != arr.shape[0]:
        raise ShapeError(
            f"labels shape {lab.shape} does not match {arr.shape[0]} images"
        )
    n, rows, cols = arr.shape
    Path(images_path).write_bytes(
        struct.pack(">iiii", IDX_IMAGES_MAGIC, n, rows, cols) + arr.tobytes()
    )
    Path(labels_path).write_bytes(
        struct.pack(">ii", IDX_LABELS_MAGIC, n) + lab.tobytes()
    )


def write_cifar10_file(images, labels, path):
    """Write one CIFAR-10 binary batch from (N,3,32,32) uint8 images."""
    arr = _as_uint8(images, "images")
    lab = _as_uint8(labels, "labels")
    if arr.ndim != 4 or arr.shape[1:] != (3, 32, 32):
        raise ShapeError(f"images must be (N,3,32,32), got {np.shape(images)}")
    if lab.ndim != 1 or lab.shape[0] != arr.shape[0]:
        raise ShapeError(
            f"labels shape {lab.shape} does not match {arr.shape[0]} images"
        )
    if lab.max(initial=0) > 9:
        raise ShapeError(f"labels must be 0..9, got {lab.max()}")
    records = np.concatenate(
        [lab[:, None], arr.reshape(arr.shape[0], -1)], axis=1
    )
    Path(path).write_bytes(records.tobytes())


def normalize(dataset: Dataset):
    """Scale pixels from [0, 255] to [0, 1]. Refuses to run twice."""
    if dataset.normalized:
        raise ContractError(f"dataset {dataset.name!r} is already normalized")
    return Dataset(
        dataset.name, dataset.images / 255.0, dataset.labels, normalized=True
    )


def split(dataset: Dataset, fraction=0.8, seed=0):
    """Deterministic shuffled split into (first, second) parts.

    fraction is the share of samples in the first part; the same seed always
    produces the same assignment.
    """
    if not 0.0 < fraction < 1.0:
        raise ConfigError(f"fraction must be in (0, 1), got {fraction}")
    n = len(dataset)
    order = np.random.default_rng(seed).permutation(n)
    k = int(round(fraction * n))
    if k == 0 or k == n:
        raise ConfigError(
            f"fraction {fraction} leaves an empty part for {n} samples"
        )
    first, second = order[:k], order[k:]
    return (
        Dataset(dataset.name, dataset.images[first], dataset.labels[first],
                dataset.normalized),
        Dataset(dataset.name, dataset.images[second], dataset.labels[second],
                dataset.normalized),
    )


def batches(dataset: Dataset, batch_size, shuffle=False, seed=0):
    """Yield (images, labels) minibatches; the tail batch may be short."""
    if batch_size < 1:
        raise ConfigError(f"batch size must be >= 1, got {batch_size}")
    n = len(dataset)
    order = np.random.default_rng(seed).permutation(n) if shuffle else np.arange(n)
    for lo in range(0, n, batch_size):
        idx = order[lo:lo + batch_size]
        yield dataset.images[idx], dataset.labels[idx]
