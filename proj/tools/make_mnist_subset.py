#!/usr/bin/env python3
"""Write a desk-scale MNIST subset as IDX files.

The source is the 5000-sample MNIST extract bundled with the mlxtend wheel
(mlxtend/data/data/mnist_5k.csv.gz, 500 images per digit, pixel values 0-255).
Even-numbered rows go to the train split and odd-numbered rows to the test
split, so both splits hold 2500 images with 250 per class.

    pip download --no-deps mlxtend -d /tmp/mlx
    python3 tools/make_mnist_subset.py /tmp/mlx/mlxtend-*.whl data/mnist
"""
import gzip
import io
import struct
import sys
import zipfile
from pathlib import Path

import numpy as np


def write_idx_images(path, images):
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, images.shape[0], 28, 28))
        f.write(images.astype(np.uint8).tobytes())


def write_idx_labels(path, labels):
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 0x00000801, labels.shape[0]))
        f.write(labels.astype(np.uint8).tobytes())


def main():
    wheel, out = Path(sys.argv[1]), Path(sys.argv[2])
    with zipfile.ZipFile(wheel) as zf:
        raw = zf.read("mlxtend/data/data/mnist_5k.csv.gz")
    table = np.genfromtxt(io.BytesIO(gzip.decompress(raw)), delimiter=",")
    images, labels = table[:, :-1], table[:, -1]
    out.mkdir(parents=True, exist_ok=True)
    for name, sl in (("train", slice(0, None, 2)), ("t10k", slice(1, None, 2))):
        write_idx_images(out / f"{name}-images-idx3-ubyte", images[sl])
        write_idx_labels(out / f"{name}-labels-idx1-ubyte", labels[sl])


if __name__ == "__main__":
    main()
