"""Shared fixtures: fixture paths, synthetic dataset directories, and
discovery of optional real dataset files."""

import os
from pathlib import Path

import numpy as np
import pytest

from tinytrain.data import write_cifar10_file, write_mnist_idx

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures_dir():
    return FIXTURES


def official_mnist_dir():
    """Directory holding the four official MNIST IDX files, or None."""
    candidates = []
    env = os.environ.get("TINYTRAIN_DATA_DIR")
    if env:
        candidates.append(Path(env))
    candidates.append(Path(__file__).parent.parent / "data")
    for root in candidates:
        base = root / "train-images-idx3-ubyte"
        if base.exists() or base.with_name(base.name + ".gz").exists():
            return root
    return None


def official_cifar_dir():
    """Directory holding the CIFAR-10 binary batches, or None."""
    candidates = []
    env = os.environ.get("TINYTRAIN_DATA_DIR")
    if env:
        candidates.append(Path(env))
    candidates.append(Path(__file__).parent.parent / "data")
    for root in candidates:
        for probe in (root, root / "cifar-10-batches-bin"):
            if (probe / "data_batch_1.bin").exists():
                return root
    return None


def synthetic_mnist_images(n, seed, rows=28, cols=28, num_classes=10):
    """Class-separable fake digit images: each class lights its own block.

    Pixel values stay in {0, 128, 255} so normalization tests can assert
    exact mapped values.
    """
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, num_classes, size=n).astype(np.uint8)
    images = rng.choice([0, 128], size=(n, rows, cols)).astype(np.uint8)
    for i, lab in enumerate(labels):
        r = (int(lab) * rows) // num_classes
        images[i, r:r + 2, :] = 255
    return images, labels


@pytest.fixture
def synthetic_mnist_dir(tmp_path):
    """A data directory shaped like the official MNIST layout."""
    root = tmp_path / "data"
    root.mkdir()
    train_images, train_labels = synthetic_mnist_images(240, seed=1)
    test_images, test_labels = synthetic_mnist_images(80, seed=2)
    write_mnist_idx(train_images, train_labels,
                    root / "train-images-idx3-ubyte",
                    root / "train-labels-idx1-ubyte")
    write_mnist_idx(test_images, test_labels,
                    root / "t10k-images-idx3-ubyte",
                    root / "t10k-labels-idx1-ubyte")
    return root


def synthetic_cifar_batch(n, seed):
    """Class-separable CIFAR-shaped records (class tints one channel)."""
    rng = np.random.default_rng(seed)
    labels = (np.arange(n) % 10).astype(np.uint8)
    images = rng.choice([0, 128], size=(n, 3, 32, 32)).astype(np.uint8)
    for i, lab in enumerate(labels):
        images[i, int(lab) % 3, : 4 + 2 * int(lab), :] = 255
    return images, labels


@pytest.fixture
def synthetic_cifar_dir(tmp_path):
    root = tmp_path / "cifar"
    root.mkdir()
    for b in range(1, 6):
        images, labels = synthetic_cifar_batch(20, seed=b)
        write_cifar10_file(images, labels, root / f"data_batch_{b}.bin")
    images, labels = synthetic_cifar_batch(20, seed=99)
    write_cifar10_file(images, labels, root / "test_batch.bin")
    return root
