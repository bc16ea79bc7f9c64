#!/usr/bin/env python3
"""Paired deep-ensemble vs Bayesian-bootstrap comparison on digit images.

Builds the 28x28 digit IDX dataset if needed (see build_digits_idx.py), runs
the pretrained-initialization protocol (B members trained to 100% train
accuracy plus N epochs, bootstrap members continued from them for N more
epochs with Dirichlet loss weights), and prints the ensemble accuracies and
per-member gaps.  Outputs (report.json, scatter.csv, margins.csv) land in
OUT_DIR and can be rendered with mpkit-plots (paired kind).

Usage: python scripts/run_equivalency.py OUT_DIR [--data DIR] [--members B]
       [--extra-epochs N] [--train N] [--seed S]
"""

import argparse
import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))
sys.path.insert(0, str(Path(__file__).resolve().parent))

from mpkit.cli import main as mpkit_main  # noqa: E402

CONFIG = """
[experiment]
seed = {seed}
mode = de-init
checkpoint_every = 10

[dataset]
kind = idx
images = {data}/train-images.idx
labels = {data}/train-labels.idx
test_images = {data}/test-images.idx
test_labels = {data}/test-labels.idx

[network]
kind = cnn
conv_channels = 6,16
fc_sizes = 120,84
kernel = 5
bias = false

[train]
learning_rate = 0.01
momentum = 0.9
epochs = 150
minibatch = 128
stop_rule = separable
extra_epochs = {extra}
dtype = float32

[predictive]
members = {members}
"""


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("out_dir")
    parser.add_argument("--data", default=None, help="existing IDX directory")
    parser.add_argument("--members", type=int, default=4)
    parser.add_argument("--extra-epochs", type=int, default=50)
    parser.add_argument("--train", type=int, default=10_000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    data = Path(args.data) if args.data else out / "data"
    if not (data / "train-images.idx").exists():
        from build_digits_idx import build
        build(data, n_train=args.train, n_test=max(args.train // 5, 500), seed=args.seed)

    cfg = out / "equivalency.ini"
    cfg.write_text(CONFIG.format(seed=args.seed, data=data, extra=args.extra_epochs,
                                 members=args.members))
    code = mpkit_main(["equivalency", "--config", str(cfg),
                       "--out", str(out / "results"), "--force"])
    if code != 0:
        return code

    report = json.loads((out / "results" / "report.json").read_text())
    de_acc = report["de"]["ensemble"]["acc"]
    bb_acc = report["bb"]["ensemble"]["acc"]
    print(f"ensemble accuracy: de={de_acc:.4f} bb={bb_acc:.4f} "
          f"gap={abs(de_acc - bb_acc) * 100:.2f}%")
    for d, b in zip(report["de"]["members"], report["bb"]["members"]):
        gap = abs(d["test_acc"] - b["test_acc"]) * 100
        print(f"member {d['member']}: de={d['test_acc']:.4f} bb={b['test_acc']:.4f} "
              f"gap={gap:.2f}%")
    return 0


if __name__ == "__main__":
    sys.exit(main())
