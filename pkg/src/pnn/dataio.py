"""MNIST IDX loading.

Files may be raw or gzip-compressed; compression is detected from the first
two bytes, not the file name.
"""

from __future__ import annotations

import gzip
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import IdxFormatError, ShapeError

IMAGES_MAGIC = 0x00000803
LABELS_MAGIC = 0x00000801
N_PIXELS = 28 * 28
N_CLASSES = 10

TRAIN_IMAGES = "train-images-idx3-ubyte"
TRAIN_LABELS = "train-labels-idx1-ubyte"
EVAL_IMAGES = "t10k-images-idx3-ubyte"
EVAL_LABELS = "t10k-labels-idx1-ubyte"


def _read_bytes(path) -> bytes:
    raw = Path(path).read_bytes()
    if raw[:2] == b"\x1f\x8b":
        try:
            return gzip.decompress(raw)
        except (OSError, EOFError) as exc:
            raise IdxFormatError(path, 0, f"corrupt gzip stream: {exc}") from None
    return raw


def _header(path, buf: bytes, magic: int, n_dims: int) -> tuple[int, ...]:
    size = 4 + 4 * n_dims
    if len(buf) < size:
        raise IdxFormatError(path, len(buf), f"truncated header, need {size} bytes")
    (found,) = struct.unpack_from(">I", buf, 0)
    if found != magic:
        raise IdxFormatError(path, 0, f"bad magic 0x{found:08x}, expected 0x{magic:08x}")
    return struct.unpack_from(f">{n_dims}I", buf, 4)


def load_idx_images(path) -> np.ndarray:
    """Read an IDX3 image file into an ``(n, 784)`` float64 array in [0, 1]."""
    buf = _read_bytes(path)
    count, rows, cols = _header(path, buf, IMAGES_MAGIC, 3)
    if (rows, cols) != (28, 28):
        raise IdxFormatError(path, 8, f"expected 28x28 images, got {rows}x{cols}")
    need = 16 + count * N_PIXELS
    if len(buf) < need:
        raise IdxFormatError(path, len(buf), f"truncated pixel data, need {need} bytes")
    pixels = np.frombuffer(buf, dtype=np.uint8, count=count * N_PIXELS, offset=16)
    return pixels.reshape(count, N_PIXELS).astype(np.float64) / 255.0


def load_idx_labels(path) -> np.ndarray:
    buf = _read_bytes(path)
    (count,) = _header(path, buf, LABELS_MAGIC, 1)
    if len(buf) < 8 + count:
        raise IdxFormatError(path, len(buf), f"truncated label data, need {8 + count} bytes")
    labels = np.frombuffer(buf, dtype=np.uint8, count=count, offset=8)
    bad = np.flatnonzero(labels > 9)
    if bad.size:
        i = int(bad[0])
        raise IdxFormatError(path, 8 + i, f"label {int(labels[i])} out of range 0..9")
    return labels.astype(np.int64)


def write_idx_images(path, pixels: np.ndarray) -> None:
    """Write uint8 pixel data (``(n, 784)`` or ``(n, 28, 28)``) as raw IDX3."""
    data = np.asarray(pixels, dtype=np.uint8).reshape(-1, N_PIXELS)
    Path(path).write_bytes(struct.pack(">IIII", IMAGES_MAGIC, len(data), 28, 28) + data.tobytes())


def write_idx_labels(path, labels) -> None:
    data = np.asarray(labels, dtype=np.uint8).ravel()
    Path(path).write_bytes(struct.pack(">II", LABELS_MAGIC, len(data)) + data.tobytes())


def one_hot(label: int) -> np.ndarray:
    if not 0 <= label < N_CLASSES:
        raise ValueError(f"label {label} out of range 0..9")
    e = np.zeros(N_CLASSES)
    e[label] = 1.0
    return e


class Example(NamedTuple):
    pixels: np.ndarray
    label: int


@dataclass(frozen=True)
class Split:
    """Images as an ``(n, n_in)`` array, labels as ``(n,)`` ints."""

    images: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        if len(self.images) != len(self.labels):
            raise ShapeError("split", self.images.shape, self.labels.shape)

    def __len__(self) -> int:
        return len(self.labels)

    def __getitem__(self, i: int) -> Example:
        return Example(self.images[i], int(self.labels[i]))

    def head(self, n: int) -> "Split":
        return Split(self.images[:n], self.labels[:n])

    def targets(self, n_classes: int = N_CLASSES) -> np.ndarray:
        return np.eye(n_classes)[self.labels]


@dataclass(frozen=True)
class Dataset:
    train: Split
    eval: Split


def make_dataset(train_images, train_labels, eval_images, eval_labels,
                 train_cap: int | None = None) -> Dataset:
    train_images = np.asarray(train_images, dtype=np.float64)
    eval_images = np.asarray(eval_images, dtype=np.float64)
    train_labels = np.asarray(train_labels, dtype=np.int64)
    eval_labels = np.asarray(eval_labels, dtype=np.int64)
    if len(train_images) != len(train_labels):
        raise ShapeError("make_dataset train", train_images.shape, train_labels.shape)
    if len(eval_images) != len(eval_labels):
        raise ShapeError("make_dataset eval", eval_images.shape, eval_labels.shape)
    train = Split(train_images, train_labels)
    if train_cap is not None:
        if train_cap < 1:
            raise ValueError(f"train_cap must be >= 1, got {train_cap}")
        train = train.head(train_cap)
    return Dataset(train, Split(eval_images, eval_labels))


def _locate(data_dir: Path, stem: str) -> Path:
    for name in (stem, stem + ".gz"):
        p = data_dir / name
        if p.exists():
            return p
    raise FileNotFoundError(f"{stem}[.gz] not found in {data_dir}")


def load_mnist(data_dir, train_size: int = 60000, train_cap: int | None = None,
               eval_cap: int | None = None) -> Dataset:
    """Load the standard MNIST files from ``data_dir``.

    ``train_size`` keeps the first N of the 60000 training images (50000
    reproduces the classic train/validation split).  ``train_cap`` then
    truncates further for quick runs.
    """
    data_dir = Path(data_dir)
    tr_x = load_idx_images(_locate(data_dir, TRAIN_IMAGES))[:train_size]
    tr_y = load_idx_labels(_locate(data_dir, TRAIN_LABELS))[:train_size]
    ev_x = load_idx_images(_locate(data_dir, EVAL_IMAGES))
    ev_y = load_idx_labels(_locate(data_dir, EVAL_LABELS))
    if eval_cap is not None:
        ev_x, ev_y = ev_x[:eval_cap], ev_y[:eval_cap]
    return make_dataset(tr_x, tr_y, ev_x, ev_y, train_cap=train_cap)
