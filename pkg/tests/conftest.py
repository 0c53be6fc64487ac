import os
from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parent.parent
ARTIFACTS = Path(os.environ.get("MFOPT_ARTIFACTS", REPO_ROOT / "artifacts"))
MNIST_DIR = Path(os.environ.get("MFOPT_MNIST_DIR", "/root/data/mnist"))

_MNIST_FILES = ("train-images-idx3-ubyte", "train-labels-idx1-ubyte",
                "t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte")


def mnist_available() -> bool:
    return all((MNIST_DIR / f).exists() for f in _MNIST_FILES)


def pytest_collection_modifyitems(config, items):
    if mnist_available():
        return
    skip = pytest.mark.skip(reason=f"MNIST IDX files not found under {MNIST_DIR} "
                                   "(set MFOPT_MNIST_DIR; see scripts/fetch_mnist.py)")
    for item in items:
        if "mnist" in item.keywords:
            item.add_marker(skip)


@pytest.fixture(scope="session")
def mnist_dir() -> Path:
    return MNIST_DIR


@pytest.fixture(scope="session")
def artifacts_dir() -> Path:
    return ARTIFACTS


def require_artifact(path: Path):
    """Acceptance tests consume experiment outputs; fail with a actionable
    message instead of an obscure traceback when they have not been run."""
    if not path.exists():
        pytest.fail(f"missing experiment artifact {path}; generate it with "
                    f"scripts/run_acceptance.sh before running the acceptance "
                    f"gate", pytrace=False)
    return path
