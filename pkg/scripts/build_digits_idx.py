#!/usr/bin/env python3
"""Build a 28x28 handwritten-digit IDX dataset from scikit-learn's bundled digits.

The sandbox has no copy of the classic 28x28 digit corpora and no dataset
downloads, so this script manufactures a stand-in with the same geometry:
the 1797 8x8 source digits are split into disjoint train/test pools,
upscaled to 24x24 with bilinear interpolation, placed on a 28x28 canvas at a
random offset, and lightly intensity-jittered so replicated source digits
are distinct images.  Output is a standard big-endian IDX pair per split,
loadable by the package's IDX reader (or by any MNIST tooling).

Usage: python scripts/build_digits_idx.py OUT_DIR [--train N] [--test N] [--seed S]
"""

import argparse
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from mpkit.data import save_idx  # noqa: E402


def bilinear_resize(img: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    h, w = img.shape
    y = np.linspace(0.0, h - 1.0, out_h)
    x = np.linspace(0.0, w - 1.0, out_w)
    y0 = np.floor(y).astype(int)
    x0 = np.floor(x).astype(int)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    wy = (y - y0)[:, None]
    wx = (x - x0)[None, :]
    return ((1 - wy) * (1 - wx) * img[np.ix_(y0, x0)]
            + (1 - wy) * wx * img[np.ix_(y0, x1)]
            + wy * (1 - wx) * img[np.ix_(y1, x0)]
            + wy * wx * img[np.ix_(y1, x1)])


def render(src: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One 28x28 uint8 image: upscale, random 0..4 pixel offset, mild jitter."""
    canvas = np.zeros((28, 28))
    oi = int(rng.integers(5))
    oj = int(rng.integers(5))
    canvas[oi:oi + 24, oj:oj + 24] = bilinear_resize(src, 24, 24)
    canvas = canvas * rng.uniform(0.85, 1.0) + rng.normal(0.0, 0.02, canvas.shape)
    return (np.clip(canvas, 0.0, 1.0) * 255).astype(np.uint8)


def build(out_dir, n_train: int = 10_000, n_test: int = 2_000, seed: int = 0) -> dict:
    from sklearn.datasets import load_digits

    digits = load_digits()
    images = digits.images / 16.0
    labels = digits.target.astype(np.uint8)

    rng = np.random.default_rng(seed)
    order = rng.permutation(len(images))
    cut = int(0.8 * len(images))
    pools = {"train": (order[:cut], n_train), "test": (order[cut:], n_test)}

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {}
    for split, (pool, count) in pools.items():
        picks = pool[rng.integers(len(pool), size=count)]
        imgs = np.stack([render(images[i], rng) for i in picks])
        img_path = out / f"{split}-images.idx"
        lab_path = out / f"{split}-labels.idx"
        save_idx(imgs, labels[picks], img_path, lab_path)
        paths[f"{split}_images"] = str(img_path)
        paths[f"{split}_labels"] = str(lab_path)
    return paths


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("out_dir")
    parser.add_argument("--train", type=int, default=10_000)
    parser.add_argument("--test", type=int, default=2_000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    paths = build(args.out_dir, args.train, args.test, args.seed)
    for key, val in sorted(paths.items()):
        print(f"{key}: {val}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
