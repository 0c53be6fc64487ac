#!/usr/bin/env python3
"""Backprop reference for the black-box ConvNet comparison: trains the
benchmark ConvNet with minibatch Adam on the same seeded 10k/2k MNIST
subsets the optimizer runs use, and writes a summary.json in the same
layout so the acceptance ordering check can consume it.

Usage:
    python scripts/run_convnet_backprop.py [--mnist-dir DIR] [--out DIR]
        [--seeds 0,1,2,3,4] [--epochs 15]
"""

import argparse
import json
import logging
import os
import time

from mfopt import __version__, nn
from mfopt.bench.config import parse_seeds
from mfopt.bench.harness import _load_mnist_arrays
from mfopt.core import RngStream

log = logging.getLogger("convnet_backprop")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--mnist-dir",
                        default=os.environ.get("MFOPT_MNIST_DIR"))
    parser.add_argument("--out", default="artifacts/runs/nn_backprop")
    parser.add_argument("--seeds", default="0,1,2,3,4")
    parser.add_argument("--epochs", type=int, default=15)
    parser.add_argument("--batch-size", type=int, default=64)
    args = parser.parse_args()
    if not args.mnist_dir:
        parser.error("pass --mnist-dir or set MFOPT_MNIST_DIR")
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    os.makedirs(args.out, exist_ok=True)

    spec = nn.table_convnet()
    entries = []
    for seed in parse_seeds(args.seeds):
        Xtr, ytr, Xte, yte = _load_mnist_arrays(
            args.mnist_dir, flat=False, train_size=10_000, test_size=2_000,
            seed=seed)
        t0 = time.perf_counter()
        w = nn.backprop_train(spec, Xtr, ytr, epochs=args.epochs,
                              batch_size=args.batch_size,
                              rng=RngStream(seed, 60))
        acc = float((nn.forward(spec, w, Xte).argmax(axis=1) == yte).mean())
        dt = time.perf_counter() - t0
        log.info("seed %d: accuracy %.4f (%.0f s)", seed, acc, dt)
        entries.append({"seed": seed, "error": None,
                        "final_test_accuracy": acc,
                        "total_seconds": dt})
    summary = {"kind": "nn", "optimizer": "backprop", "version": __version__,
               "epochs": args.epochs, "runs": entries,
               "failed": False}
    with open(os.path.join(args.out, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=1)
    return 0


if __name__ == "__main__":
    import sys
    sys.exit(main())
