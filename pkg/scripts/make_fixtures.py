"""Regenerate the tiny committed dataset fixtures under tests/fixtures/.

The fixtures are deterministic: a 12-image IDX pair shaped like the MNIST
files and one 10-record CIFAR-style binary batch. Pixel values are drawn
from {0, 128, 255} so normalization tests can assert exact mapped values.
Run from the repository root:

    python3 scripts/make_fixtures.py
"""

from pathlib import Path

import numpy as np

from tinytrain.data import write_cifar10_file, write_mnist_idx

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def main():
    FIXTURES.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(20260814)

    images = rng.choice([0, 128, 255], size=(12, 28, 28)).astype(np.uint8)
    labels = np.array([0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 0, 1], dtype=np.uint8)
    write_mnist_idx(images, labels,
                    FIXTURES / "mini-images-idx3-ubyte",
                    FIXTURES / "mini-labels-idx1-ubyte")

    cifar_images = rng.choice([0, 128, 255], size=(10, 3, 32, 32)).astype(np.uint8)
    cifar_labels = np.arange(10, dtype=np.uint8)
    write_cifar10_file(cifar_images, cifar_labels, FIXTURES / "mini_batch.bin")

    print(f"fixtures written to {FIXTURES}")


if __name__ == "__main__":
    main()
