#!/usr/bin/env python3
"""Fetch the four canonical MNIST IDX files into a local directory.

The benchmark experiments read MNIST from a directory containing

    train-images-idx3-ubyte    train-labels-idx1-ubyte
    t10k-images-idx3-ubyte     t10k-labels-idx1-ubyte

(uncompressed, big-endian IDX). This script tries, in order:

1. the canonical HTTP mirrors of the original dataset (gzipped IDX),
2. the `mnist-data` npm package, which bundles the same four files verbatim
   (useful behind registries that mirror npm but not arbitrary HTTP).

Usage:
    python scripts/fetch_mnist.py [--dest DIR]

then point the tools at it with --mnist-dir DIR or MFOPT_MNIST_DIR=DIR.
"""

import argparse
import gzip
import os
import shutil
import subprocess
import sys
import tarfile
import tempfile
import urllib.request

FILES = (
    "train-images-idx3-ubyte",
    "train-labels-idx1-ubyte",
    "t10k-images-idx3-ubyte",
    "t10k-labels-idx1-ubyte",
)

MIRRORS = (
    "https://ossci-datasets.s3.amazonaws.com/mnist/",
    "https://storage.googleapis.com/cvdf-datasets/mnist/",
)


def have_all(dest: str) -> bool:
    return all(os.path.exists(os.path.join(dest, f)) for f in FILES)


def fetch_http(dest: str) -> bool:
    for base in MIRRORS:
        try:
            for name in FILES:
                url = base + name + ".gz"
                print(f"downloading {url}")
                with urllib.request.urlopen(url, timeout=60) as resp:
                    gz = resp.read()
                with open(os.path.join(dest, name), "wb") as out:
                    out.write(gzip.decompress(gz))
            return True
        except Exception as e:
            print(f"mirror {base} failed: {e}", file=sys.stderr)
    return False


def fetch_npm(dest: str) -> bool:
    """The mnist-data npm package ships the IDX files under package/data/."""
    with tempfile.TemporaryDirectory() as tmp:
        try:
            out = subprocess.run(["npm", "pack", "mnist-data@1.2.6"],
                                 cwd=tmp, capture_output=True, text=True,
                                 check=True)
        except (OSError, subprocess.CalledProcessError) as e:
            print(f"npm pack failed: {e}", file=sys.stderr)
            return False
        tgz = os.path.join(tmp, out.stdout.strip().splitlines()[-1])
        with tarfile.open(tgz) as tar:
            tar.extractall(tmp)
        src = os.path.join(tmp, "package", "data")
        if not all(os.path.exists(os.path.join(src, f)) for f in FILES):
            print("npm package layout unexpected", file=sys.stderr)
            return False
        for name in FILES:
            shutil.copy(os.path.join(src, name), os.path.join(dest, name))
    return True


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--dest", default=os.environ.get(
        "MFOPT_MNIST_DIR", os.path.expanduser("~/data/mnist")))
    args = parser.parse_args()
    os.makedirs(args.dest, exist_ok=True)
    if have_all(args.dest):
        print(f"already present in {args.dest}")
        return 0
    if fetch_http(args.dest) or fetch_npm(args.dest):
        print(f"MNIST ready in {args.dest}")
        return 0
    print("all sources failed; download the four IDX files manually",
          file=sys.stderr)
    return 1


if __name__ == "__main__":
    sys.exit(main())
