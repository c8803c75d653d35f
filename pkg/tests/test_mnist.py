import gzip

import numpy as np
import pytest

from bcops.mnist import (
    IdxFormatError,
    MnistSource,
    filter_digits,
    load_mnist,
    parse_idx_images,
    parse_idx_labels,
    serialize_idx_images,
    serialize_idx_labels,
)


@pytest.fixture
def sample_pair(tmp_path):
    g = np.random.default_rng(0)
    images = g.integers(0, 256, size=(30, 784), dtype=np.uint8)
    digits = g.integers(0, 10, size=30, dtype=np.uint8)
    img_path = tmp_path / "images-idx3-ubyte"
    lab_path = tmp_path / "labels-idx1-ubyte"
    img_path.write_bytes(serialize_idx_images(images))
    lab_path.write_bytes(serialize_idx_labels(digits))
    return images, digits, img_path, lab_path


def test_round_trip(sample_pair):
    images, digits, img_path, lab_path = sample_pair
    data = load_mnist(MnistSource(str(img_path), str(lab_path)))
    assert data.n_rows == 30
    assert np.array_equal(data.digits, digits)
    assert np.allclose(data.features * 255.0, images)


def test_pixels_scaled_to_unit_interval(sample_pair):
    _, _, img_path, lab_path = sample_pair
    data = load_mnist(MnistSource(str(img_path), str(lab_path)))
    assert data.features.min() >= 0.0 and data.features.max() <= 1.0


def test_gzip_detection(sample_pair, tmp_path):
    images, digits, img_path, lab_path = sample_pair
    gz_img = tmp_path / "images.gz"
    gz_lab = tmp_path / "labels.gz"
    gz_img.write_bytes(gzip.compress(img_path.read_bytes()))
    gz_lab.write_bytes(gzip.compress(lab_path.read_bytes()))
    data = load_mnist(MnistSource(str(gz_img), str(gz_lab)))
    assert np.array_equal(data.digits, digits)


def test_header_round_trip(sample_pair):
    # re-serializing parsed content reproduces the original bytes, header included
    images, digits, img_path, lab_path = sample_pair
    assert serialize_idx_images(parse_idx_images(img_path.read_bytes())) == img_path.read_bytes()
    assert serialize_idx_labels(parse_idx_labels(lab_path.read_bytes())) == lab_path.read_bytes()


def test_bad_image_magic():
    with pytest.raises(IdxFormatError, match="magic.*offset 0"):
        parse_idx_images(b"\x00\x00\x08\x01" + b"\x00" * 100)


def test_bad_label_magic():
    with pytest.raises(IdxFormatError, match="magic.*offset 0"):
        parse_idx_labels(b"\x00\x00\x08\x03" + b"\x00" * 100)


def test_truncated_header():
    with pytest.raises(IdxFormatError, match="offset"):
        parse_idx_images(b"\x00\x00\x08\x03\x00")


def test_truncated_pixels(sample_pair):
    _, _, img_path, _ = sample_pair
    buf = img_path.read_bytes()[:-10]
    with pytest.raises(IdxFormatError, match="truncated"):
        parse_idx_images(buf)


def test_wrong_geometry():
    import struct

    buf = struct.pack(">IIII", 0x00000803, 1, 14, 14) + b"\x00" * (14 * 14)
    with pytest.raises(IdxFormatError, match="28x28"):
        parse_idx_images(buf)


def test_count_mismatch(sample_pair, tmp_path):
    images, _, img_path, _ = sample_pair
    short = tmp_path / "short-labels"
    short.write_bytes(serialize_idx_labels(np.zeros(7, dtype=np.uint8)))
    with pytest.raises(IdxFormatError, match="count mismatch"):
        load_mnist(MnistSource(str(img_path), str(short)))


def test_filter_digits(sample_pair):
    images, digits, img_path, lab_path = sample_pair
    data = load_mnist(MnistSource(str(img_path), str(lab_path)))
    assert np.array_equal(filter_digits(data, range(10)).digits, digits)
    assert filter_digits(data, set()).n_rows == 0
    kept = filter_digits(data, {0, 1, 2, 3, 4, 5})
    assert np.array_equal(kept.digits, digits[digits <= 5])
