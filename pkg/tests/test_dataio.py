import gzip
import struct

import numpy as np
import pytest
from hypothesis import given, settings, HealthCheck, strategies as st
from hypothesis.extra.numpy import arrays

from pnn.dataio import (IMAGES_MAGIC, LABELS_MAGIC, load_idx_images, load_idx_labels, load_mnist,
                        make_dataset, one_hot, write_idx_images, write_idx_labels)
from pnn.errors import IdxFormatError, ShapeError


def test_zero_and_full_scale_pixels(tmp_path):
    pix = np.zeros((2, 784), dtype=np.uint8)
    pix[1, :] = 255
    write_idx_images(tmp_path / "img", pix)
    out = load_idx_images(tmp_path / "img")
    assert out.shape == (2, 784)
    assert np.all(out[0] == 0.0)
    assert np.all(out[1] == 1.0)


def test_gzip_detected_by_magic_bytes(tmp_path):
    pix = np.arange(784, dtype=np.uint64).astype(np.uint8).reshape(1, 784)
    write_idx_images(tmp_path / "raw", pix)
    (tmp_path / "packed.bin").write_bytes(gzip.compress((tmp_path / "raw").read_bytes()))
    np.testing.assert_array_equal(load_idx_images(tmp_path / "packed.bin"), load_idx_images(tmp_path / "raw"))


@settings(max_examples=25, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(arrays(np.uint8, st.tuples(st.integers(1, 4), st.just(784))))
def test_image_round_trip(tmp_path, pix):
    write_idx_images(tmp_path / "rt", pix)
    np.testing.assert_array_equal(load_idx_images(tmp_path / "rt"), pix / 255.0)


def test_normalisation_preserves_order():
    pix = np.arange(256, dtype=np.uint8)
    scaled = pix.astype(np.float64) / 255.0
    assert np.all(np.diff(scaled) > 0)


def test_image_errors(tmp_path):
    p = tmp_path / "bad"
    p.write_bytes(struct.pack(">IIII", 0x1234, 1, 28, 28) + bytes(784))
    with pytest.raises(IdxFormatError) as info:
        load_idx_images(p)
    assert info.value.offset == 0

    p.write_bytes(struct.pack(">IIII", IMAGES_MAGIC, 1, 27, 28) + bytes(27 * 28))
    with pytest.raises(IdxFormatError, match="28x28"):
        load_idx_images(p)

    p.write_bytes(struct.pack(">IIII", IMAGES_MAGIC, 2, 28, 28) + bytes(784))
    with pytest.raises(IdxFormatError, match="truncated") as info:
        load_idx_images(p)
    assert info.value.offset == 16 + 784

    p.write_bytes(b"\x00\x00")
    with pytest.raises(IdxFormatError, match="header"):
        load_idx_images(p)


def test_labels(tmp_path):
    write_idx_labels(tmp_path / "one", [7])
    assert load_idx_labels(tmp_path / "one").tolist() == [7]

    write_idx_labels(tmp_path / "bad", [1, 10])
    with pytest.raises(IdxFormatError, match="label 10") as info:
        load_idx_labels(tmp_path / "bad")
    assert info.value.offset == 9

    (tmp_path / "magic").write_bytes(struct.pack(">II", IMAGES_MAGIC, 0))
    with pytest.raises(IdxFormatError, match="magic"):
        load_idx_labels(tmp_path / "magic")

    (tmp_path / "short").write_bytes(struct.pack(">II", LABELS_MAGIC, 3) + b"\x01")
    with pytest.raises(IdxFormatError, match="truncated"):
        load_idx_labels(tmp_path / "short")


def test_one_hot():
    assert one_hot(0).tolist() == [1] + [0] * 9
    assert one_hot(9).tolist() == [0] * 9 + [1]
    assert one_hot(3).tolist() == np.eye(10)[3].tolist()
    for bad in (-1, 10):
        with pytest.raises(ValueError):
            one_hot(bad)


def test_make_dataset():
    x = np.zeros((20, 784))
    y = np.arange(20) % 10
    ds = make_dataset(x, y, x[:5], y[:5], train_cap=8)
    assert len(ds.train) == 8 and len(ds.eval) == 5
    assert ds.train[3].label == 3
    assert ds.train[3].pixels.shape == (784,)
    with pytest.raises(ShapeError):
        make_dataset(x, y[:-1], x, y)
    with pytest.raises(ShapeError):
        make_dataset(x, y, x, y[:3])


def test_official_files(mnist_dir):
    ds = load_mnist(mnist_dir)
    # 60000 + 10000 = 70000 images in total
    assert len(ds.train) == 60000
    assert len(ds.eval) == 10000
    assert len(ds.train) + len(ds.eval) == 70000
    assert ds.train.images.min() >= 0.0 and ds.train.images.max() <= 1.0
    assert set(np.unique(ds.eval.labels)) == set(range(10))
    assert len(load_mnist(mnist_dir, train_size=50000).train) == 50000
    assert len(load_mnist(mnist_dir, train_cap=5000).train) == 5000
