#!/usr/bin/env python3
"""Generate a deterministic 28x28 handwritten-digit dataset in IDX format.

Upsamples the scikit-learn 8x8 digits to 28x28 with random shifts, small
rotations and per-image contrast jitter, producing MNIST-shaped files for
desk-scale experiments when the real MNIST files are not on disk. Pass the
four official MNIST files to the CLI instead whenever they are available.
"""

import argparse
import struct
import sys

import numpy as np
from scipy import ndimage
from sklearn.datasets import load_digits


def write_idx_images(path, images):
    n, rows, cols = images.shape
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, n, rows, cols))
        f.write(images.astype(np.uint8).tobytes())


def write_idx_labels(path, labels):
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(labels.astype(np.uint8).tobytes())


def render(base, rng):
    img = ndimage.zoom(base, 20.0 / 8.0, order=1)  # 8x8 -> 20x20
    angle = rng.uniform(-6.0, 6.0)
    img = ndimage.rotate(img, angle, order=1, reshape=False, mode="constant")
    canvas = np.zeros((28, 28), dtype=np.float64)
    dy, dx = rng.integers(-2, 3, size=2)
    y0, x0 = 4 + dy, 4 + dx
    canvas[y0:y0 + 20, x0:x0 + 20] = img
    canvas *= rng.uniform(0.9, 1.0)
    return np.clip(canvas / 16.0 * 255.0, 0, 255)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--train", type=int, default=12000)
    parser.add_argument("--test", type=int, default=2000)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--out-dir", required=True)
    args = parser.parse_args()

    x, y = load_digits(return_X_y=True)
    x = x.reshape(-1, 8, 8)
    rng = np.random.default_rng(args.seed)

    # split the base prototypes so train and test never share a source image
    order = rng.permutation(len(x))
    split = int(0.85 * len(x))
    pools = {"train": order[:split], "test": order[split:]}
    sizes = {"train": args.train, "test": args.test}

    for name, pool in pools.items():
        n = sizes[name]
        images = np.zeros((n, 28, 28), dtype=np.uint8)
        labels = np.zeros(n, dtype=np.uint8)
        for i in range(n):
            j = pool[rng.integers(0, len(pool))]
            images[i] = render(x[j], rng)
            labels[i] = y[j]
        prefix = "train" if name == "train" else "t10k"
        write_idx_images(f"{args.out_dir}/{prefix}-images-idx3-ubyte", images)
        write_idx_labels(f"{args.out_dir}/{prefix}-labels-idx1-ubyte", labels)
        print(f"{name}: {n} images -> {args.out_dir}/{prefix}-*", file=sys.stderr)


if __name__ == "__main__":
    main()
