"""Minimal IDX reader and the digit-1-vs-7 PU task.

Nothing is ever downloaded; callers point at a directory that already
holds the standard four IDX files (optionally gzipped).
"""

from __future__ import annotations

import gzip
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import InvalidInputError, PUDataset, PUKitError

IDX_DTYPES = {
    0x08: np.uint8,
    0x09: np.int8,
    0x0B: np.dtype(">i2"),
    0x0C: np.dtype(">i4"),
    0x0D: np.dtype(">f4"),
    0x0E: np.dtype(">f8"),
}

FILES = {
    "train_images": "train-images-idx3-ubyte",
    "train_labels": "train-labels-idx1-ubyte",
    "test_images": "t10k-images-idx3-ubyte",
    "test_labels": "t10k-labels-idx1-ubyte",
}

# positives train / val, unlabeled train / val
MNIST17_COUNTS = (3000, 500, 3000, 500)


class MnistUnavailable(PUKitError):
    exit_code = 0


def read_idx(path) -> np.ndarray:
    path = Path(path)
    opener = gzip.open if path.suffix == ".gz" else open
    with opener(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 4 or raw[0] != 0 or raw[1] != 0:
        raise InvalidInputError(f"{path}: not an IDX file")
    code, ndim = raw[2], raw[3]
    if code not in IDX_DTYPES:
        raise InvalidInputError(f"{path}: unknown IDX type code 0x{code:02x}")
    shape = struct.unpack(f">{ndim}I", raw[4:4 + 4 * ndim])
    dtype = np.dtype(IDX_DTYPES[code])
    data = np.frombuffer(raw, dtype=dtype, offset=4 + 4 * ndim)
    if data.size != int(np.prod(shape)):
        raise InvalidInputError(f"{path}: payload size does not match header {shape}")
    return data.reshape(shape)


def write_idx(path, array: np.ndarray) -> None:
    """Inverse of :func:`read_idx` (used to build test fixtures)."""
    array = np.asarray(array)
    code = {np.dtype(np.uint8): 0x08, np.dtype(np.int8): 0x09}.get(array.dtype)
    if code is None:
        array = array.astype(">f8")
        code = 0x0E
    header = bytes([0, 0, code, array.ndim]) + struct.pack(f">{array.ndim}I", *array.shape)
    path = Path(path)
    opener = gzip.open if path.suffix == ".gz" else open
    with opener(path, "wb") as fh:
        fh.write(header + array.tobytes())


def _find(directory: Path, stem: str) -> Path:
    for name in (stem, stem + ".gz", stem.replace("-idx", ".idx")):
        if (directory / name).exists():
            return directory / name
    raise MnistUnavailable(f"{stem} not found in {directory}")


def load_mnist(directory) -> dict:
    directory = Path(directory)
    if not directory.is_dir():
        raise MnistUnavailable(f"MNIST directory {directory} does not exist")
    return {key: read_idx(_find(directory, stem)) for key, stem in FILES.items()}


@dataclass(frozen=True)
class MnistSpec:
    path: str
    alpha: float = 0.5
    scale: float = 1.0
    seed: int = 0
    positive_digit: int = 1
    negative_digit: int = 7

    @property
    def kind(self) -> str:
        return "mnist17"


def mnist17_task(spec: MnistSpec) -> tuple[PUDataset, PUDataset]:
    """PU dataset (train+val pooled) and a labelled PvN test set.

    Positives are digit ``positive_digit``; unlabeled samples mix both digits
    at ``alpha``.  Pixel values are scaled to [0, 1].
    """
    raw = load_mnist(spec.path)
    rng = np.random.default_rng(spec.seed)
    X = raw["train_images"].reshape(len(raw["train_images"]), -1) / 255.0
    y = raw["train_labels"]
    pos_pool = rng.permutation(np.flatnonzero(y == spec.positive_digit))
    neg_pool = rng.permutation(np.flatnonzero(y == spec.negative_digit))
    n_p = int(round(spec.scale * (MNIST17_COUNTS[0] + MNIST17_COUNTS[1])))
    n_u = int(round(spec.scale * (MNIST17_COUNTS[2] + MNIST17_COUNTS[3])))
    n_u_pos = int(round(spec.alpha * n_u))
    if n_p + n_u_pos > len(pos_pool) or n_u - n_u_pos > len(neg_pool):
        raise InvalidInputError("not enough digits for the requested counts")
    positives = X[pos_pool[:n_p]]
    u_idx = np.concatenate([pos_pool[n_p:n_p + n_u_pos], neg_pool[:n_u - n_u_pos]])
    labels = np.concatenate([np.ones(n_u_pos, int), -np.ones(n_u - n_u_pos, int)])
    order = rng.permutation(n_u)
    data = PUDataset(positives, X[u_idx[order]], labels[order], spec.alpha)

    Xt = raw["test_images"].reshape(len(raw["test_images"]), -1) / 255.0
    yt = raw["test_labels"]
    keep = (yt == spec.positive_digit) | (yt == spec.negative_digit)
    test = PUDataset(np.empty((0, Xt.shape[1])), Xt[keep],
                     np.where(yt[keep] == spec.positive_digit, 1, -1), 0.5)
    return data, test
