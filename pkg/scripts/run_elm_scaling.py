#!/usr/bin/env python3
"""Generate the accuracy-vs-hidden-size artifact (ELM ridge fits vs
end-to-end FFNN training) consumed by the acceptance tests and plots.

Usage:
    python scripts/run_elm_scaling.py [--mnist-dir DIR] [--out PATH]
"""

import argparse
import logging
import os

from mfopt.bench.harness import _load_mnist_arrays, elm_scaling

ELM_SIZES = [50, 100, 200, 300, 400, 600, 800, 1000, 1500, 2000, 3000]
FFNN_SIZES = [4, 8, 16, 32, 64, 100]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--mnist-dir",
                        default=os.environ.get("MFOPT_MNIST_DIR"))
    parser.add_argument("--out", default="artifacts/elm_scaling.json")
    args = parser.parse_args()
    if not args.mnist_dir:
        parser.error("pass --mnist-dir or set MFOPT_MNIST_DIR")
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    Xtr, ytr, Xte, yte = _load_mnist_arrays(args.mnist_dir, flat=True,
                                            train_size=None, test_size=None,
                                            seed=0)
    os.makedirs(os.path.dirname(os.path.abspath(args.out)), exist_ok=True)
    elm_scaling(Xtr, ytr, Xte, yte, elm_sizes=ELM_SIZES,
                ffnn_sizes=FFNN_SIZES, out_path=args.out)
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    import sys
    sys.exit(main())
